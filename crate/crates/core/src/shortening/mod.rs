//! Curve evolution: the fixed-endpoint Birkhoff map, discrete curve shortening flow,
//! corner rounding, and the prescribed-curvature solver.

mod birkhoff;
mod corner;
mod csf;
mod seeded;
mod solver;

use serde::{Deserialize, Serialize};

pub use birkhoff::{birkhoff_map, BirkhoffConfig, BrokenGeodesic};
pub use corner::{constant_curvature_arc, round_corner, surgery_scale, RoundingMode};
pub(crate) use corner::exit_parameter_about;
pub use csf::{csf_path_to_point, csf_step, enclosed_area, FlowPath};
pub use seeded::{seed_region, solve_on_surface, InstabilityCertificate, SolveRequest, Solution};
pub use solver::{solve_prescribed_curvature, solve_with_trace, FlowRecord};

/// Step and stopping policy shared by the flows and the Newton solver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    /// Fraction of the stability bound `0.4 * (min segment)^2` used as time step.
    pub dt_fraction: f64,
    /// Stopping threshold for `max |kappa - c|` in the solver.
    pub residual: f64,
    /// Step budget of the flow.
    pub max_iterations: usize,
    /// Newton iteration budget of the solver.
    pub newton_iterations: usize,
    /// Initial Newton step scale; halved until the residual decreases.
    pub damping: f64,
    /// The flow stops once the enclosed area falls below this fraction of the initial area.
    pub area_floor: f64,
    /// Resampling period of the flow, in steps.
    pub resample_every: usize,
    /// Recording period of flow slices, in steps.
    pub record_every: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            dt_fraction: 0.5,
            residual: 1e-9,
            max_iterations: 400_000,
            newton_iterations: 100,
            damping: 1.0,
            area_floor: 1e-4,
            resample_every: 10,
            record_every: 20,
        }
    }
}
