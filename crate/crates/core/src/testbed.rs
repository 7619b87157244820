//! Expensive fixtures shared across the unit-test suite, built once per run.

use crate::coupled2d::{
    default_mode_range, default_shared_grid, initial_state, minimize_full, MinimizeOutcome,
};
use crate::nonlinear1d::FlowParams;
use crate::params::ScaledParams;
use std::sync::LazyLock;

/// Converged coupled minimizer at omega = 100, D = 0.5, G = 1, seed 1, on the
/// default shared grid. The endgame state takes minutes to reach and several
/// tests assert different facets of it, so it is computed once per test run.
pub(crate) fn endgame_w100() -> &'static MinimizeOutcome {
    static OUT: LazyLock<MinimizeOutcome> = LazyLock::new(|| {
        let p = endgame_params();
        let g = default_shared_grid(&p).expect("default grid");
        let (lo, hi) = default_mode_range(p.omega);
        let init = initial_state(&p, lo, hi, &g, 1).expect("seeded state");
        minimize_full(&init, &FlowParams::coupled_defaults()).expect("endgame converges")
    });
    &OUT
}

pub(crate) fn endgame_params() -> ScaledParams {
    ScaledParams::new(100.0, 0.5, 1.0).expect("valid parameters")
}
