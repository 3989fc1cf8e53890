//! Force-directed node placement with position-Verlet integration.
//!
//! Linked patterns attract through linear springs, every pair of nodes repels
//! with an inverse-square force and a weak pull toward the centroid keeps
//! disconnected components (INVALID in particular) from drifting away. The
//! simulation runs in 64-bit floats with a fixed summation order (ascending
//! node id), so identical inputs give bitwise-identical coordinates.

use alloc::vec::Vec;
use core::hash::Hasher;

use siphasher::sip::SipHasher13;

use crate::sitemap::{Point, Sitemap, SitemapError};

/// Distances below this are clamped before computing repulsion.
pub const MIN_DISTANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutConfig {
    /// Spring constant of a site map link.
    pub attraction_stiffness: f64,
    /// Spring rest length, in simulation units.
    pub rest_length: f64,
    /// Inverse-square repulsion coefficient between every pair of nodes.
    pub repulsion_strength: f64,
    /// Linear pull of every node toward the current centroid.
    pub gravity: f64,
    /// Fraction of the previous step's displacement carried over.
    pub damping: f64,
    pub time_step: f64,
    /// Upper bound on a single node's displacement per step.
    pub max_step: f64,
    pub max_iterations: u32,
    /// Stop once every node moved less than this in one step.
    pub convergence_epsilon: f64,
    pub seed: u64,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            attraction_stiffness: 0.08,
            rest_length: 0.05,
            repulsion_strength: 0.002,
            gravity: 0.01,
            damping: 0.85,
            time_step: 1.0,
            max_step: 0.05,
            max_iterations: 1000,
            convergence_epsilon: 1e-4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LayoutError {
    #[error("invalid layout config: {0}")]
    Config(&'static str),
    #[error("non-finite position at iteration {iteration}")]
    NumericalInstability { iteration: u32 },
    #[error(transparent)]
    Sitemap(#[from] SitemapError),
}

impl LayoutConfig {
    pub fn validate(&self) -> Result<(), LayoutError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.attraction_stiffness) {
            return Err(LayoutError::Config("attraction_stiffness must be > 0"));
        }
        if !positive(self.rest_length) {
            return Err(LayoutError::Config("rest_length must be > 0"));
        }
        if !positive(self.repulsion_strength) {
            return Err(LayoutError::Config("repulsion_strength must be > 0"));
        }
        if !(self.gravity.is_finite() && self.gravity >= 0.0) {
            return Err(LayoutError::Config("gravity must be >= 0"));
        }
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(LayoutError::Config("damping must lie in (0, 1)"));
        }
        if !positive(self.time_step) {
            return Err(LayoutError::Config("time_step must be > 0"));
        }
        if !positive(self.max_step) {
            return Err(LayoutError::Config("max_step must be > 0"));
        }
        if self.max_iterations == 0 {
            return Err(LayoutError::Config("max_iterations must be > 0"));
        }
        if !positive(self.convergence_epsilon) || self.convergence_epsilon >= self.rest_length {
            return Err(LayoutError::Config("convergence_epsilon must lie in (0, rest_length)"));
        }
        Ok(())
    }
}

/// Raw simulation output before rescaling into the unit square.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub positions: Vec<Point>,
    pub iterations: u32,
    pub converged: bool,
}

/// Seeded starting point for every node, derived from `(seed, pattern)`
/// alone so that node insertion order does not matter.
pub fn initial_positions(sitemap: &Sitemap, seed: u64) -> Vec<Point> {
    sitemap
        .patterns()
        .map(|p| Point::new(unit_hash(seed, 0x7873_616c_7400_0001, p), unit_hash(seed, 0x7973_616c_7400_0002, p)))
        .collect()
}

fn unit_hash(seed: u64, salt: u64, text: &str) -> f64 {
    let mut h = SipHasher13::new_with_keys(seed, salt);
    h.write(text.as_bytes());
    // top 53 bits -> [0, 1)
    (h.finish() >> 11) as f64 / (1u64 << 53) as f64
}

/// Runs the Verlet simulation from [`initial_positions`] without rescaling.
pub fn simulate(sitemap: &Sitemap, config: &LayoutConfig) -> Result<Simulation, LayoutError> {
    config.validate()?;
    let start = initial_positions(sitemap, config.seed);
    simulate_from(sitemap, config, start)
}

/// Runs the Verlet simulation from the given starting positions.
pub fn simulate_from(
    sitemap: &Sitemap,
    config: &LayoutConfig,
    start: Vec<Point>,
) -> Result<Simulation, LayoutError> {
    config.validate()?;
    let n = sitemap.len();
    assert_eq!(start.len(), n, "one starting position per node");
    let neighbors = undirected_neighbors(sitemap);

    let mut pos = start;
    let mut prev = pos.clone();
    let mut next = pos.clone();
    let dt2 = config.time_step * config.time_step;

    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iterations {
        iterations += 1;
        let (cx, cy) = centroid(&pos);
        let mut max_disp: f64 = 0.0;
        for i in 0..n {
            let (fx, fy) = net_force(i, &pos, &neighbors[i], (cx, cy), config);
            let mut dx = config.damping * (pos[i].x - prev[i].x) + fx * dt2;
            let mut dy = config.damping * (pos[i].y - prev[i].y) + fy * dt2;
            let len = libm::sqrt(dx * dx + dy * dy);
            if len > config.max_step {
                let s = config.max_step / len;
                dx *= s;
                dy *= s;
            }
            let p = Point::new(pos[i].x + dx, pos[i].y + dy);
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(LayoutError::NumericalInstability { iteration: iterations });
            }
            next[i] = p;
            max_disp = max_disp.max(libm::sqrt(dx * dx + dy * dy));
        }
        core::mem::swap(&mut prev, &mut pos);
        core::mem::swap(&mut pos, &mut next);
        if max_disp < config.convergence_epsilon {
            converged = true;
            break;
        }
    }
    Ok(Simulation { positions: pos, iterations, converged })
}

/// Lays the site map out and stores unit-square coordinates on it.
pub fn run_layout(sitemap: Sitemap, config: &LayoutConfig) -> Result<Sitemap, LayoutError> {
    let sim = simulate(&sitemap, config)?;
    let coords = rescale_to_unit(&sim.positions);
    Ok(sitemap.with_coordinates(coords)?)
}

/// Uniform scale and translation into `[0, 1]^2`, centred along the shorter
/// axis. A degenerate extent maps every point to the centre.
pub fn rescale_to_unit(points: &[Point]) -> Vec<Point> {
    if points.is_empty() {
        return Vec::new();
    }
    let (mut min_x, mut max_x, mut min_y, mut max_y) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in points {
        min_x = min_x.min(p.x);
        max_x = max_x.max(p.x);
        min_y = min_y.min(p.y);
        max_y = max_y.max(p.y);
    }
    let (w, h) = (max_x - min_x, max_y - min_y);
    let extent = w.max(h);
    if extent.is_nan() || extent <= 0.0 {
        return points.iter().map(|_| Point::new(0.5, 0.5)).collect();
    }
    let off_x = (1.0 - w / extent) / 2.0;
    let off_y = (1.0 - h / extent) / 2.0;
    points
        .iter()
        .map(|p| {
            Point::new(
                ((p.x - min_x) / extent + off_x).clamp(0.0, 1.0),
                ((p.y - min_y) / extent + off_y).clamp(0.0, 1.0),
            )
        })
        .collect()
}

fn undirected_neighbors(sitemap: &Sitemap) -> Vec<Vec<usize>> {
    let mut adj = alloc::vec![Vec::new(); sitemap.len()];
    for (f, t) in sitemap.edges() {
        adj[f.index()].push(t.index());
        adj[t.index()].push(f.index());
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

fn centroid(pos: &[Point]) -> (f64, f64) {
    let (mut sx, mut sy) = (0.0, 0.0);
    for p in pos {
        sx += p.x;
        sy += p.y;
    }
    let n = pos.len() as f64;
    (sx / n, sy / n)
}

fn net_force(
    i: usize,
    pos: &[Point],
    neighbors: &[usize],
    centre: (f64, f64),
    cfg: &LayoutConfig,
) -> (f64, f64) {
    let pi = pos[i];
    let (mut fx, mut fy) = (0.0, 0.0);

    for &j in neighbors {
        let (dx, dy) = (pos[j].x - pi.x, pos[j].y - pi.y);
        let d = libm::sqrt(dx * dx + dy * dy);
        if d > 0.0 {
            let f = cfg.attraction_stiffness * (d - cfg.rest_length) / d;
            fx += f * dx;
            fy += f * dy;
        }
    }

    for (j, pj) in pos.iter().enumerate() {
        if j == i {
            continue;
        }
        let (mut dx, mut dy) = (pi.x - pj.x, pi.y - pj.y);
        let raw = libm::sqrt(dx * dx + dy * dy);
        if raw == 0.0 {
            // coincident: split along x, lower id to the left
            dx = if i < j { -1.0 } else { 1.0 };
            dy = 0.0;
        } else {
            dx /= raw;
            dy /= raw;
        }
        let d = raw.max(MIN_DISTANCE);
        let f = cfg.repulsion_strength / (d * d);
        fx += f * dx;
        fy += f * dy;
    }

    fx -= cfg.gravity * (pi.x - centre.0);
    fy -= cfg.gravity * (pi.y - centre.1);
    (fx, fy)
}
