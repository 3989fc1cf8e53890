//! TOML configuration: pipeline settings and synthetic traffic profiles.
//!
//! Precedence is flags, then the config file, then built-in defaults. The
//! command line applies flags on top of [`PipelineConfig::from_file`].

use std::path::Path;
use std::time::Duration;

use botgraph_core::layout::LayoutConfig;
use botgraph_core::render::{solve_radius_params, RenderConfig};
use botgraph_core::synth::{Behavior, TrafficProfile};
use botgraph_core::DEFAULT_MIN_SPOTS;
use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {reason}")]
    Invalid { path: String, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrawlSettings {
    pub timeout: Duration,
    pub user_agent: String,
    pub max_patterns: usize,
    pub respect_robots: bool,
}

impl Default for CrawlSettings {
    fn default() -> Self {
        CrawlSettings {
            timeout: Duration::from_secs(10),
            user_agent: concat!("botgraph-crawler/", env!("CARGO_PKG_VERSION")).to_string(),
            max_patterns: 1000,
            respect_robots: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub seed: u64,
    pub jobs: usize,
    pub min_spots: usize,
    pub layout: LayoutConfig,
    pub render: RenderConfig,
    pub crawl: CrawlSettings,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            jobs: 1,
            min_spots: DEFAULT_MIN_SPOTS,
            layout: LayoutConfig::default(),
            render: RenderConfig::default(),
            crawl: CrawlSettings::default(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileDoc {
    seed: Option<u64>,
    jobs: Option<usize>,
    min_spots: Option<usize>,
    #[serde(default)]
    layout: LayoutDoc,
    #[serde(default)]
    render: RenderDoc,
    #[serde(default)]
    crawl: CrawlDoc,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayoutDoc {
    attraction_stiffness: Option<f64>,
    rest_length: Option<f64>,
    repulsion_strength: Option<f64>,
    gravity: Option<f64>,
    damping: Option<f64>,
    time_step: Option<f64>,
    max_step: Option<f64>,
    max_iterations: Option<u32>,
    convergence_epsilon: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RenderDoc {
    image_size: Option<u32>,
    padding_fraction: Option<f64>,
    line_width: Option<u32>,
    r_min: Option<f64>,
    r_max: Option<f64>,
    x_gate: Option<f64>,
    r_gate: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CrawlDoc {
    timeout_secs: Option<f64>,
    user_agent: Option<String>,
    max_patterns: Option<usize>,
    respect_robots: Option<bool>,
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })
}

fn invalid(path: &Path, reason: impl ToString) -> ConfigError {
    ConfigError::Invalid { path: path.display().to_string(), reason: reason.to_string() }
}

impl PipelineConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        Self::from_toml(&read(path)?).map_err(|reason| invalid(path, reason))
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        let doc: FileDoc = toml::from_str(text).map_err(|e| e.to_string())?;
        let mut cfg = PipelineConfig::default();
        macro_rules! set {
            ($dst:expr, $src:expr) => {
                if let Some(v) = $src {
                    $dst = v;
                }
            };
        }
        set!(cfg.seed, doc.seed);
        set!(cfg.jobs, doc.jobs);
        set!(cfg.min_spots, doc.min_spots);

        let l = doc.layout;
        set!(cfg.layout.attraction_stiffness, l.attraction_stiffness);
        set!(cfg.layout.rest_length, l.rest_length);
        set!(cfg.layout.repulsion_strength, l.repulsion_strength);
        set!(cfg.layout.gravity, l.gravity);
        set!(cfg.layout.damping, l.damping);
        set!(cfg.layout.time_step, l.time_step);
        set!(cfg.layout.max_step, l.max_step);
        set!(cfg.layout.max_iterations, l.max_iterations);
        set!(cfg.layout.convergence_epsilon, l.convergence_epsilon);
        cfg.layout.validate().map_err(|e| e.to_string())?;

        let r = doc.render;
        set!(cfg.render.image_size, r.image_size);
        set!(cfg.render.padding_fraction, r.padding_fraction);
        set!(cfg.render.line_width, r.line_width);
        let d = cfg.render.radius;
        cfg.render.radius = solve_radius_params(
            r.r_min.unwrap_or(d.r_min),
            r.r_max.unwrap_or(d.r_max),
            r.x_gate.unwrap_or(d.x_gate),
            r.r_gate.unwrap_or(d.r_gate),
        )
        .map_err(|e| e.to_string())?;
        cfg.render.validate().map_err(|e| e.to_string())?;

        let c = doc.crawl;
        if let Some(t) = c.timeout_secs {
            cfg.crawl.timeout = Duration::try_from_secs_f64(t).map_err(|e| e.to_string())?;
        }
        set!(cfg.crawl.user_agent, c.user_agent);
        set!(cfg.crawl.max_patterns, c.max_patterns);
        set!(cfg.crawl.respect_robots, c.respect_robots);
        Ok(cfg)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfilesDoc {
    #[serde(rename = "profile", default)]
    profiles: Vec<ProfileDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDoc {
    kind: String,
    count: usize,
    length: (u32, u32),
    seed: Option<u64>,
    mean_gap_ms: Option<f64>,
    follow_probability: Option<f64>,
    target: Option<String>,
    repeat_fraction: Option<f64>,
    invalid_fraction: Option<f64>,
}

/// Mixes the global seed with a profile's position and own seed so that one
/// `--seed` drives every profile.
pub fn profile_seed(global: u64, index: usize, own: u64) -> u64 {
    let mut z = global ^ own.rotate_left(32) ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn load_profiles(path: &Path, global_seed: u64) -> Result<Vec<(TrafficProfile, usize)>, ConfigError> {
    parse_profiles(&read(path)?, global_seed).map_err(|reason| invalid(path, reason))
}

pub fn parse_profiles(text: &str, global_seed: u64) -> Result<Vec<(TrafficProfile, usize)>, String> {
    let doc: ProfilesDoc = toml::from_str(text).map_err(|e| e.to_string())?;
    doc.profiles
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let need = |v: Option<f64>, name: &str| v.ok_or_else(|| format!("profile {i} ({}) needs {name}", p.kind));
            let behavior = match p.kind.as_str() {
                "human_walk" => Behavior::HumanWalk { follow_probability: p.follow_probability.unwrap_or(0.8) },
                "scraper" => Behavior::Scraper {
                    target: p.target.clone().ok_or_else(|| format!("profile {i} (scraper) needs target"))?,
                    repeat_fraction: need(p.repeat_fraction, "repeat_fraction")?,
                },
                "crawler" => Behavior::Crawler,
                "bruteforcer" => Behavior::Bruteforcer { invalid_fraction: need(p.invalid_fraction, "invalid_fraction")? },
                other => return Err(format!("profile {i}: unknown kind {other:?}")),
            };
            let mut profile = TrafficProfile::new(behavior, p.length, profile_seed(global_seed, i, p.seed.unwrap_or(0)));
            if let Some(gap) = p.mean_gap_ms {
                profile.mean_gap_ms = gap;
            }
            profile.validate().map_err(|e| format!("profile {i}: {e}"))?;
            Ok((profile, p.count))
        })
        .collect()
}
