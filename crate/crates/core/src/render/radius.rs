//! Spot radius as a function of access frequency.
//!
//! `f(x) = c / (1 + e^(b - a*x))` with `f(1) = r_min`, `f(+inf) = r_max` and
//! `f(x_gate) = r_gate`. The last two constraints fix `c = r_max`; the other
//! two are linear in `(a, b)` after taking logs.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub x_gate: f64,
    pub r_gate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum RadiusError {
    #[error(
        "infeasible radius constraints: need 0 < r_min < r_gate < r_max and x_gate > 1 \
         (got r_min={r_min}, r_max={r_max}, x_gate={x_gate}, r_gate={r_gate})"
    )]
    Infeasible { r_min: f64, r_max: f64, x_gate: f64, r_gate: f64 },
}

/// Radius constants used for 256x256 trace images.
pub const DEFAULT_R_MIN: f64 = 4.0;
pub const DEFAULT_R_MAX: f64 = 80.0;
pub const DEFAULT_X_GATE: f64 = 50.0;
pub const DEFAULT_R_GATE: f64 = 50.0;

pub fn solve_radius_params(r_min: f64, r_max: f64, x_gate: f64, r_gate: f64) -> Result<RadiusParams, RadiusError> {
    let ok = [r_min, r_max, x_gate, r_gate].iter().all(|v| v.is_finite())
        && 0.0 < r_min
        && r_min < r_gate
        && r_gate < r_max
        && x_gate > 1.0;
    if !ok {
        return Err(RadiusError::Infeasible { r_min, r_max, x_gate, r_gate });
    }
    let c = r_max;
    // b - a = ln(c/r_min - 1), b - a*x_gate = ln(c/r_gate - 1)
    let at_one = libm::log(c / r_min - 1.0);
    let at_gate = libm::log(c / r_gate - 1.0);
    let a = (at_one - at_gate) / (x_gate - 1.0);
    let b = a + at_one;
    Ok(RadiusParams { a, b, c, r_min, r_max, x_gate, r_gate })
}

impl RadiusParams {
    pub fn radius(&self, frequency: f64) -> f64 {
        self.c / (1.0 + libm::exp(self.b - self.a * frequency))
    }
}

impl Default for RadiusParams {
    fn default() -> Self {
        solve_radius_params(DEFAULT_R_MIN, DEFAULT_R_MAX, DEFAULT_X_GATE, DEFAULT_R_GATE)
            .expect("default constraints are feasible")
    }
}

/// Spot radius in pixels for an access frequency `x >= 1`.
pub fn radius(params: &RadiusParams, x: f64) -> f64 {
    params.radius(x)
}
