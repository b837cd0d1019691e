//! Problem instances for the solver: objective oracles plus exact solvers for
//! the two block subproblems.
//!
//! A problem decomposes its objective as L(x, y) = f(x) + Q(x, y) + g(y) with
//! f and g smooth and Q the (possibly nonsmooth, possibly extended-valued)
//! coupling. Each instance supplies exact minimizers for the two linearized
//! Bregman subproblems
//!
//!   x⁺ = argmin_x Q(x, ŷ) + ⟨∇f(x̂), x⟩ + t·D_φ₁(x, x̂),
//!   y⁺ = argmin_y Q(x⁺, y) + ⟨∇g(ŷ), y⟩ + t·D_φ₂(y, ŷ),
//!
//! where the scale t is the backtracking hook (t = 1 when disabled).

mod logreg;
mod qp;

pub use logreg::{capped_l1_prox, capped_l1_prox_scalar, gen_logreg, LogRegInstance};
pub use qp::{gen_qp, QpInstance};

use crate::bregman::BregmanGenerator;
use crate::error::Result;

/// Oracle bundle for one problem instance.
///
/// All methods are pure; instances are immutable after construction and safe
/// to share across concurrent solver runs.
pub trait Problem: Sync {
    fn dim_x(&self) -> usize;
    fn dim_y(&self) -> usize;

    fn f_value(&self, x: &[f64]) -> f64;
    fn f_grad(&self, x: &[f64]) -> Vec<f64>;
    fn g_value(&self, y: &[f64]) -> f64;
    fn g_grad(&self, y: &[f64]) -> Vec<f64>;

    /// Coupling value; returns +∞ outside dom Q.
    fn q_value(&self, x: &[f64], y: &[f64]) -> f64;

    /// ∇ₓq of the smooth part of the split Q = q + h, when available.
    /// Consumed by the subgradient-bound certificate, not by the iteration.
    fn q_grad_x(&self, x: &[f64], y: &[f64]) -> Option<Vec<f64>>;

    /// Lipschitz constant of ∇f, `None` when unknown (forces backtracking).
    fn lip_f(&self) -> Option<f64>;
    /// Lipschitz constant of ∇g.
    fn lip_g(&self) -> Option<f64>;
    /// Cross-block constant ξ with ‖∇ₓq(x, y) − ∇ₓq(x, ȳ)‖ ≤ ξ‖y − ȳ‖.
    fn xi(&self) -> Option<f64>;

    /// Exact minimizer of the x-subproblem at the hat pair.
    fn solve_x(
        &self,
        y_hat: &[f64],
        x_hat: &[f64],
        grad_f_hat: &[f64],
        gen: &BregmanGenerator,
        scale: f64,
    ) -> Result<Vec<f64>>;

    /// Exact minimizer of the y-subproblem given the fresh x-block.
    fn solve_y(
        &self,
        x_new: &[f64],
        y_hat: &[f64],
        grad_g_hat: &[f64],
        gen: &BregmanGenerator,
        scale: f64,
    ) -> Result<Vec<f64>>;

    /// Full objective L(x, y) = f(x) + Q(x, y) + g(y); +∞ outside dom Q.
    fn objective(&self, x: &[f64], y: &[f64]) -> f64 {
        let q = self.q_value(x, y);
        if !q.is_finite() {
            return f64::INFINITY;
        }
        self.f_value(x) + q + self.g_value(y)
    }
}

/// Positive root of a·x² + b·x − c = 0 with a, c > 0, evaluated in the
/// cancellation-free branch. Exactly one positive root exists.
pub(crate) fn stable_positive_root(a: f64, b: f64, c: f64) -> f64 {
    debug_assert!(a > 0.0 && c > 0.0);
    let disc = (b * b + 4.0 * a * c).sqrt();
    if b >= 0.0 {
        2.0 * c / (b + disc)
    } else {
        (disc - b) / (2.0 * a)
    }
}
