//! Graph structure shows up in the layout geometry.

use botgraph_core::{run_layout, LayoutConfig, Point, Sitemap};

fn dist(a: Point, b: Point) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

fn cliques() -> Sitemap {
    let nodes: Vec<String> = (0..10).map(|i| format!("/n{i}")).collect();
    let mut edges = Vec::new();
    for base in [0, 5] {
        for i in base..base + 5 {
            for j in i + 1..base + 5 {
                edges.push((nodes[i].clone(), nodes[j].clone()));
            }
        }
    }
    edges.push((nodes[4].clone(), nodes[5].clone()));
    Sitemap::from_parts(&nodes, &edges, None).unwrap()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[test]
fn cliques_stay_together() {
    for seed in 0..5 {
        let cfg = LayoutConfig { seed, ..LayoutConfig::default() };
        let laid = run_layout(cliques(), &cfg).unwrap();
        let p = laid.coordinates().unwrap();
        let (mut intra, mut inter) = (Vec::new(), Vec::new());
        for i in 0..10 {
            for j in i + 1..10 {
                let d = dist(p[i], p[j]);
                if (i < 5) == (j < 5) { intra.push(d) } else { inter.push(d) }
            }
        }
        assert!(mean(&intra) < mean(&inter), "seed {seed}: {} vs {}", mean(&intra), mean(&inter));
    }
}

#[test]
fn path_neighbours_are_closer() {
    let nodes = ["/a", "/b", "/c"];
    let edges = [("/a", "/b"), ("/b", "/c")];
    for seed in 0..5 {
        let cfg = LayoutConfig { seed, ..LayoutConfig::default() };
        let laid = run_layout(Sitemap::from_parts(&nodes, &edges, None).unwrap(), &cfg).unwrap();
        let p = laid.coordinates().unwrap();
        assert!(dist(p[0], p[1]) < dist(p[0], p[2]), "seed {seed}");
        assert!(dist(p[2], p[1]) < dist(p[2], p[0]), "seed {seed}");
    }
}

#[test]
fn rerun_is_bitwise_identical() {
    let cfg = LayoutConfig::default();
    let a = run_layout(cliques(), &cfg).unwrap();
    let b = run_layout(cliques(), &cfg).unwrap();
    let bits = |m: &Sitemap| m.coordinates().unwrap().iter().map(|p| (p.x.to_bits(), p.y.to_bits())).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
}
