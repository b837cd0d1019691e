//! Alternating structure-adapted proximal gradient solvers for nonconvex,
//! nonsmooth objectives of the form L(x, y) = f(x) + Q(x, y) + g(y).
//!
//! The engine alternates exact Bregman-proximal block updates, applies
//! two-step inertial extrapolation, and accepts the extrapolated point only
//! when it does not increase the objective, so every run is monotone in L.
//! Extrapolation parameters come from pluggable schedules (constant, FISTA
//! recurrence, ratio rule, adaptive multiplicative), the x-block stepsize can
//! be calibrated by BB-initialized backtracking when the smooth curvature is
//! unknown, and recorded runs can be replayed against sufficient-decrease and
//! subgradient-bound certificates.
//!
//! Two benchmark problem families ship with the crate: a ball-constrained
//! nonconvex quadratic program and capped-ℓ1 sparse logistic regression, each
//! with closed-form block subproblem solvers for both supported kernels.

pub mod bregman;
pub mod error;
pub mod oracles;
pub mod problems;
pub mod schedules;
pub mod solver;
pub mod vecmath;

pub use bregman::{BregmanGenerator, Kind};
pub use error::{Error, Result};
pub use problems::{
    capped_l1_prox, capped_l1_prox_scalar, gen_logreg, gen_qp, LogRegInstance, Problem, QpInstance,
};
pub use schedules::ExtrapolationSchedule;
pub use solver::{
    alternating_step, backtrack_x_update, bb_stepsize, certify_subgradient_bound,
    certify_sufficient_decrease, extrapolate, monotone_gate, residual, run,
    subgradient_bound_modulus, sufficient_decrease_modulus, Backtracking, CertificateReport,
    Iterate, RunSummary, RunTrace, SolverConfig, TraceRow,
};
