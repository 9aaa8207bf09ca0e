//! Coordinate-wise descent for `min_x ‖A − xxᵀ‖²_F`.
//!
//! Every method shares one loop: pick coordinates from `(x, z = Ax)`,
//! move them, and refresh `z` with one column read per moved coordinate.
//! Strategies differ only in the pick rule ([`Pick`]) and the update rule
//! ([`Update`]).

mod cubic;
mod state;
mod strategy;

pub use cubic::{delta_f, solve_cubic_min, CubicCoeffs, Roots};
pub use state::SolverState;
pub use strategy::{
    coord_cubic, coord_ls_delta, pick_cyclic, pick_gauss_southwell, pick_grad_power, pick_greedy_ls, power_method_step,
    step, stepsize_bound, vec_ls_alpha, Method, Pick, StepReport, StrategyConfig, Update,
};
