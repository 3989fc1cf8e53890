//! Image-level properties: one blob per spot, blob area close to the disc area.

use std::collections::{BTreeMap, BTreeSet};

use botgraph_core::{render, NodeId, Point, RenderConfig, SessionSubgraph, Sitemap, TraceImage};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// 20 nodes on a 5 x 4 grid, roughly 57 px apart at 256 px.
fn grid() -> Sitemap {
    let names: Vec<String> = (0..19).map(|i| format!("/g{i}")).collect();
    let map = Sitemap::from_parts(&names, &[], None).unwrap();
    let pts = (0..20).map(|i| Point::new((i % 5) as f64 / 4.0, (i / 5) as f64 / 3.0)).collect();
    map.with_coordinates(pts).unwrap()
}

fn components(img: &TraceImage) -> usize {
    let n = img.size as usize;
    let mut seen = vec![false; n * n];
    let mut count = 0;
    for start in 0..n * n {
        if seen[start] || img.pixels[start] != 0 {
            continue;
        }
        count += 1;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            let (r, c) = (i / n, i % n);
            let mut push = |j: usize| {
                if !seen[j] && img.pixels[j] == 0 {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if r > 0 { push(i - n); }
            if r + 1 < n { push(i + n); }
            if c > 0 { push(i - 1); }
            if c + 1 < n { push(i + 1); }
        }
    }
    count
}

#[test]
fn spot_count_equals_blob_count_without_lines() {
    let map = grid();
    let cfg = RenderConfig { line_width: 0, ..RenderConfig::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..40 {
        let k = rng.random_range(1..=20);
        let mut ids: Vec<u32> = (0..20).collect();
        ids.shuffle(&mut rng);
        let frequencies: BTreeMap<NodeId, u32> =
            ids[..k].iter().map(|&i| (NodeId(i), rng.random_range(1..=20))).collect();
        let g = SessionSubgraph { session_id: "s".into(), frequencies, edges: BTreeSet::new(), label: None };
        let img = render(&map, &g, &cfg).unwrap();
        assert_eq!(components(&img), k);
    }
}

#[test]
fn lines_connect_spots() {
    let map = grid();
    let chain: Vec<NodeId> = [0, 6, 12, 18].map(NodeId).to_vec();
    let g = SessionSubgraph {
        session_id: "s".into(),
        frequencies: chain.iter().map(|&n| (n, 1)).collect(),
        edges: chain.windows(2).map(|w| (w[0], w[1])).collect(),
        label: None,
    };
    let img = render(&map, &g, &RenderConfig::default()).unwrap();
    assert_eq!(components(&img), 1);
}

#[test]
fn disc_area_tracks_pi_r_squared() {
    let names = ["/only"];
    let map = Sitemap::from_parts(&names, &[], None).unwrap();
    let map = map.with_coordinates(vec![Point::new(0.5, 0.5), Point::new(0.0, 0.0)]).unwrap();
    let cfg = RenderConfig::default();
    for f in [1u32, 5, 20, 50, 120] {
        let g = SessionSubgraph {
            session_id: "s".into(),
            frequencies: [(NodeId(0), f)].into_iter().collect(),
            edges: BTreeSet::new(),
            label: None,
        };
        let r = cfg.radius.radius(f as f64);
        let area = std::f64::consts::PI * r * r;
        let black = render(&map, &g, &cfg).unwrap().black_count() as f64;
        // lattice points in a disc deviate from the area by O(r)
        assert!((black - area).abs() <= 4.0 * r + 4.0, "f={f} r={r} black={black} area={area}");
    }
}
