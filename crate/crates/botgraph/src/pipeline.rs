//! Session logs to trace images, in parallel but in a fixed output order.

use std::collections::BTreeMap;

use botgraph_core::{
    bot_shares, filter_min_spots, map_session, render, sessionize, RenderConfig, RenderError, Session,
    SessionError, SessionSubgraph, Sitemap, SubgraphError, TraceImage,
};
use rayon::prelude::*;
use serde_json::{json, Value};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Subgraph(#[from] SubgraphError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderStats {
    pub sessions: usize,
    pub rendered: usize,
    /// Sessions at or below the spot threshold.
    pub excluded: usize,
    /// Bot share of requests and sessions over the input, when fully labeled.
    pub shares: Option<(f64, f64)>,
}

pub struct RenderOutput {
    pub images: Vec<TraceImage>,
    pub subgraphs: Vec<SessionSubgraph>,
    pub stats: RenderStats,
}

/// Maps and filters sessions, then renders the survivors on `jobs` threads.
/// Images come back in session order regardless of `jobs`.
pub fn render_sessions(
    sitemap: &Sitemap,
    sessions: &[Session],
    config: &RenderConfig,
    min_spots: usize,
    jobs: usize,
) -> Result<RenderOutput, PipelineError> {
    let mapped = sessions.iter().map(|s| map_session(sitemap, s)).collect::<Result<Vec<_>, _>>()?;
    let subgraphs = filter_min_spots(mapped, min_spots);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| PipelineError::Pool(e.to_string()))?;
    let images = pool.install(|| {
        subgraphs.par_iter().map(|g| render(sitemap, g, config)).collect::<Result<Vec<_>, _>>()
    })?;

    let stats = RenderStats {
        sessions: sessions.len(),
        rendered: images.len(),
        excluded: sessions.len() - images.len(),
        shares: bot_shares(sessions).ok(),
    };
    Ok(RenderOutput { images, subgraphs, stats })
}

pub fn render_requests(
    sitemap: &Sitemap,
    requests: Vec<botgraph_core::Request>,
    config: &RenderConfig,
    min_spots: usize,
    jobs: usize,
) -> Result<RenderOutput, PipelineError> {
    let sessions = sessionize(requests)?;
    render_sessions(sitemap, &sessions, config, min_spots, jobs)
}

/// Debug view of a subgraph with patterns in place of node ids.
pub fn subgraph_json(sitemap: &Sitemap, g: &SessionSubgraph) -> Value {
    let frequencies: BTreeMap<&str, u32> = g.frequencies.iter().map(|(&n, &f)| (sitemap.pattern(n), f)).collect();
    let edges: Vec<[&str; 2]> = g.edges.iter().map(|&(a, b)| [sitemap.pattern(a), sitemap.pattern(b)]).collect();
    json!({
        "session_id": g.session_id,
        "label": g.label.map(|l| l.as_str()),
        "frequencies": frequencies,
        "edges": edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use botgraph_core::layout::{run_layout, LayoutConfig};
    use botgraph_core::synth::{generate, Behavior, TrafficProfile};

    fn fixture() -> (Sitemap, Vec<Session>) {
        let nodes = ["/", "/a", "/b", "/c", "/d", "/e?id=*"];
        let edges: Vec<(&str, &str)> = vec![("/", "/a"), ("/a", "/b"), ("/b", "/c"), ("/c", "/d"), ("/", "/e?id=*")];
        let map = Sitemap::from_parts(&nodes, &edges, None).unwrap();
        let map = run_layout(map, &LayoutConfig::default()).unwrap();
        let profiles = [
            (TrafficProfile::new(Behavior::Crawler, (2, 10), 1), 20),
            (TrafficProfile::new(Behavior::HumanWalk { follow_probability: 0.8 }, (2, 10), 2), 20),
        ];
        let sessions = generate(&map, &profiles).unwrap();
        (map, sessions)
    }

    #[test]
    fn order_independent_of_jobs() {
        let (map, sessions) = fixture();
        let cfg = RenderConfig::default();
        let one = render_sessions(&map, &sessions, &cfg, 3, 1).unwrap();
        let four = render_sessions(&map, &sessions, &cfg, 3, 4).unwrap();
        assert_eq!(one.images, four.images);
        assert_eq!(one.stats, four.stats);
        assert_eq!(one.stats.rendered + one.stats.excluded, 40);
        assert!(one.images.iter().zip(&one.subgraphs).all(|(i, g)| i.session_id == g.session_id && g.spot_count() > 3));
        let (bor, bos) = one.stats.shares.unwrap();
        assert!((bos - 0.5).abs() < 1e-12);
        assert!(bor > 0.0 && bor < 1.0);
    }

    #[test]
    fn debug_json_uses_patterns() {
        let (map, sessions) = fixture();
        let g = map_session(&map, &sessions[0]).unwrap();
        let v = subgraph_json(&map, &g);
        let total: u64 = v["frequencies"].as_object().unwrap().values().map(|x| x.as_u64().unwrap()).sum();
        assert_eq!(total, sessions[0].len() as u64);
        for e in v["edges"].as_array().unwrap() {
            assert!(map.lookup(e[0].as_str().unwrap()).is_some());
        }
    }

    #[test]
    fn unlayouted_sitemap_fails() {
        let (map, sessions) = fixture();
        let err = render_sessions(&map.without_coordinates(), &sessions, &RenderConfig::default(), 0, 1);
        assert!(matches!(err, Err(PipelineError::Render(RenderError::LayoutRequired))));
    }
}
