//! Rendered images against a per-pixel brute force over every shape.

use std::collections::{BTreeMap, BTreeSet};

use botgraph_core::render::raster::{disc_contains, segment_contains, FixedPoint};
use botgraph_core::{render, NodeId, Point, RenderConfig, SessionSubgraph, Sitemap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixture(rng: &mut ChaCha8Rng) -> Sitemap {
    let names: Vec<String> = (0..19).map(|i| format!("/page{i}")).collect();
    let map = Sitemap::from_parts(&names, &[], None).unwrap();
    let points = (0..map.len()).map(|_| Point::new(rng.random(), rng.random())).collect();
    map.with_coordinates(points).unwrap()
}

fn random_subgraph(rng: &mut ChaCha8Rng, n: u32) -> SessionSubgraph {
    let k = rng.random_range(1..=8);
    let nodes: Vec<NodeId> = (0..k).map(|_| NodeId(rng.random_range(0..n))).collect();
    let frequencies: BTreeMap<NodeId, u32> = nodes.iter().map(|&id| (id, rng.random_range(1..=400))).collect();
    let mut edges = BTreeSet::new();
    for w in nodes.windows(2) {
        if w[0] != w[1] {
            edges.insert((w[0], w[1]));
        }
    }
    SessionSubgraph { session_id: "s".into(), frequencies, edges, label: None }
}

/// Rebuilds the subpixel geometry from the config and tests every pixel
/// against every shape, with no bounding boxes or row windows.
fn brute_force(map: &Sitemap, g: &SessionSubgraph, cfg: &RenderConfig) -> Vec<bool> {
    let s = cfg.image_size as f64;
    let fixed = |v: f64| (v * 256.0).round() as i64;
    let centre = |id: NodeId| {
        let p = map.coordinate(id).unwrap();
        let lo = cfg.padding_fraction * s;
        let span = s - 2.0 * lo;
        FixedPoint { x: fixed(lo + p.x * span), y: fixed(lo + p.y * span) }
    };
    let discs: Vec<(FixedPoint, i64)> =
        g.frequencies.iter().map(|(&id, &f)| (centre(id), fixed(cfg.radius.radius(f as f64)))).collect();
    let segs: Vec<(FixedPoint, FixedPoint)> = g.edges.iter().map(|&(a, b)| (centre(a), centre(b))).collect();
    let hw = cfg.line_width as i64 * 128;
    let size = cfg.image_size as i64;
    let mut out = Vec::with_capacity((size * size) as usize);
    for row in 0..size {
        for col in 0..size {
            let (px, py) = (col * 256, row * 256);
            let on_line = cfg.line_width > 0 && segs.iter().any(|&(a, b)| segment_contains(a, b, hw, px, py));
            out.push(on_line || discs.iter().any(|&(c, r)| disc_contains(c, r, px, py)));
        }
    }
    out
}

#[test]
fn fifty_random_subgraphs_match_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    let map = fixture(&mut rng);
    for case in 0..50 {
        let cfg = RenderConfig { line_width: case % 4, ..RenderConfig::default() };
        let g = random_subgraph(&mut rng, map.len() as u32);
        let img = render(&map, &g, &cfg).unwrap();
        let expect = brute_force(&map, &g, &cfg);
        let diff = img.pixels.iter().zip(&expect).filter(|&(&p, &b)| (p == 0) != b).count();
        assert_eq!(diff, 0, "case {case}: {diff} pixels differ");
        assert!(img.pixels.iter().all(|&p| p == 0 || p == 255));
    }
}

#[test]
fn small_canvas_and_wide_strokes() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let map = fixture(&mut rng);
    for case in 0..20 {
        let mut cfg = RenderConfig { image_size: 160, padding_fraction: 0.0, line_width: 7, ..RenderConfig::default() };
        cfg.radius = botgraph_core::solve_radius_params(2.0, 30.0, 20.0, 20.0).unwrap();
        let g = random_subgraph(&mut rng, map.len() as u32);
        let img = render(&map, &g, &cfg).unwrap();
        let expect = brute_force(&map, &g, &cfg);
        assert!(img.pixels.iter().zip(&expect).all(|(&p, &b)| (p == 0) == b), "case {case}");
    }
}
