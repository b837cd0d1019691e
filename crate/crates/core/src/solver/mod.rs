//! The alternating Bregman proximal iteration with two-step inertia.
//!
//! Each iteration solves the two linearized block subproblems at the hat
//! pair ẑ_k (x first, then y against the fresh x), forms the extrapolated
//! candidate
//!
//!   (u, v) = z_{k+1} + α_k (z_{k+1} − z_k) + β_k (z_k − z_{k−1}),
//!
//! and takes it as the next hat pair only when it does not increase the
//! objective. The gate makes the method monotone in L regardless of the
//! inertia parameters. Stopping uses E_k = ‖x_{k+1} − x_k‖ + ‖y_{k+1} − y_k‖.
//!
//! An optional backtracking box calibrates the x-block Bregman scale t per
//! iteration when the smooth-block curvature is unknown, optionally seeded by
//! a Barzilai–Borwein estimate from the previous displacement pair.

mod diagnostics;
mod trace;

pub use diagnostics::{
    certify_subgradient_bound, certify_sufficient_decrease, subgradient_bound_modulus,
    sufficient_decrease_modulus, CertificateReport,
};
pub use trace::{RetainedIterates, RunSummary, RunTrace, TraceRow, TRACE_CSV_HEADER};

use std::time::Instant;

use crate::bregman::BregmanGenerator;
use crate::error::{Error, Result};
use crate::problems::Problem;
use crate::schedules::ExtrapolationSchedule;
use crate::vecmath::{check_dims, norm_diff, norm_diff_sq};

/// One primal pair (x-block, y-block).
#[derive(Clone, Debug, PartialEq)]
pub struct Iterate {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Iterate {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        Self { x, y }
    }

    /// ‖x − x'‖² + ‖y − y'‖².
    pub fn diff_norm_sq(&self, other: &Iterate) -> f64 {
        norm_diff_sq(&self.x, &other.x) + norm_diff_sq(&self.y, &other.y)
    }
}

/// Backtracking-box parameters.
#[derive(Clone, Copy, Debug)]
pub struct Backtracking {
    /// Stepsize growth factor ρ > 1.
    pub rho: f64,
    /// Sufficient-decrease margin δ > 0.
    pub delta: f64,
    /// Lower stepsize bound t_min > 0.
    pub t_min: f64,
}

impl Default for Backtracking {
    fn default() -> Self {
        Self {
            rho: 2.0,
            delta: 1e-5,
            t_min: 1.3,
        }
    }
}

/// Everything one run needs besides the problem and the starting point.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub bregman_x: BregmanGenerator,
    pub bregman_y: BregmanGenerator,
    pub schedule: ExtrapolationSchedule,
    /// Stopping threshold on E_k.
    pub tol: f64,
    pub max_iter: usize,
    /// Enables the backtracking box on the x-block.
    pub backtracking: Option<Backtracking>,
    /// Seed each backtracking round with the BB stepsize instead of warm
    /// starting from the previous accepted scale.
    pub bb_init: bool,
    /// Keep the full iterate history for the descent certificates.
    pub retain_iterates: bool,
}

impl SolverConfig {
    pub fn new(
        bregman_x: BregmanGenerator,
        bregman_y: BregmanGenerator,
        schedule: ExtrapolationSchedule,
        tol: f64,
        max_iter: usize,
    ) -> Result<Self> {
        if tol <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        Ok(Self {
            bregman_x,
            bregman_y,
            schedule,
            tol,
            max_iter,
            backtracking: None,
            bb_init: false,
            retain_iterates: false,
        })
    }

    pub fn with_backtracking(mut self, bt: Backtracking) -> Result<Self> {
        if bt.rho <= 1.0 || bt.delta <= 0.0 || bt.t_min <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "backtracking needs rho > 1, delta > 0, t_min > 0, got {bt:?}"
            )));
        }
        self.backtracking = Some(bt);
        Ok(self)
    }

    pub fn with_bb_init(mut self, on: bool) -> Self {
        self.bb_init = on;
        self
    }

    pub fn with_retention(mut self, on: bool) -> Self {
        self.retain_iterates = on;
        self
    }

    fn validate<P: Problem + ?Sized>(&self, problem: &P) -> Result<()> {
        if problem.lip_f().is_none() && self.backtracking.is_none() {
            return Err(Error::InvalidConfig(
                "the smooth-block curvature is unknown: enable backtracking".into(),
            ));
        }
        Ok(())
    }
}

/// One alternating pass: x-update at the hat pair, then y-update against the
/// fresh x (Gauss–Seidel order). Unit Bregman scale on both blocks.
pub fn alternating_step<P: Problem + ?Sized>(
    problem: &P,
    hat: &Iterate,
    cfg: &SolverConfig,
) -> Result<Iterate> {
    let grad_f_hat = problem.f_grad(&hat.x);
    let x = problem.solve_x(&hat.y, &hat.x, &grad_f_hat, &cfg.bregman_x, 1.0)?;
    let grad_g_hat = problem.g_grad(&hat.y);
    let y = problem.solve_y(&x, &hat.y, &grad_g_hat, &cfg.bregman_y, 1.0)?;
    Ok(Iterate { x, y })
}

/// Two-step inertial extrapolation, applied blockwise:
/// (u, v) = z⁺ + α(z⁺ − z) + β(z − z⁻).
///
/// The α = β = 0 and β = 0 short circuits keep the disabled terms from
/// touching the arithmetic, so the plain and one-step special cases are
/// bit-identical to loops that never form them.
pub fn extrapolate(
    z_new: &Iterate,
    z_cur: &Iterate,
    z_prev: &Iterate,
    alpha: f64,
    beta: f64,
) -> Result<Iterate> {
    check_dims(z_new.x.len(), z_cur.x.len())?;
    check_dims(z_cur.x.len(), z_prev.x.len())?;
    check_dims(z_new.y.len(), z_cur.y.len())?;
    check_dims(z_cur.y.len(), z_prev.y.len())?;
    if alpha == 0.0 && beta == 0.0 {
        return Ok(z_new.clone());
    }
    let combine = |new: &[f64], cur: &[f64], prev: &[f64]| -> Vec<f64> {
        new.iter()
            .zip(cur.iter().zip(prev))
            .map(|(&n, (&c, &p))| {
                if beta == 0.0 {
                    n + alpha * (n - c)
                } else if alpha == 0.0 {
                    n + beta * (c - p)
                } else {
                    n + alpha * (n - c) + beta * (c - p)
                }
            })
            .collect()
    };
    Ok(Iterate {
        x: combine(&z_new.x, &z_cur.x, &z_prev.x),
        y: combine(&z_new.y, &z_cur.y, &z_prev.y),
    })
}

/// The monotone acceptance test: take the extrapolated pair iff it does not
/// increase the objective. Ties accept; +∞ (out of domain) rejects.
pub fn monotone_gate(l_extrap: f64, l_plain: f64) -> bool {
    l_extrap <= l_plain
}

/// Stopping residual ‖x⁺ − x‖ + ‖y⁺ − y‖.
pub fn residual(z_new: &Iterate, z_old: &Iterate) -> Result<f64> {
    check_dims(z_new.x.len(), z_old.x.len())?;
    check_dims(z_new.y.len(), z_old.y.len())?;
    Ok(norm_diff(&z_new.x, &z_old.x) + norm_diff(&z_new.y, &z_old.y))
}

/// Barzilai–Borwein stepsize max(|sᵀl| / sᵀs, t_min) from a displacement pair,
/// falling back to t_min on a degenerate (zero) displacement.
pub fn bb_stepsize(
    grad_new: &[f64],
    grad_old: &[f64],
    x_new: &[f64],
    x_old: &[f64],
    t_min: f64,
) -> f64 {
    let mut sl = 0.0;
    let mut ss = 0.0;
    for i in 0..x_new.len() {
        let s = x_new[i] - x_old[i];
        let l = grad_new[i] - grad_old[i];
        sl += s * l;
        ss += s * s;
    }
    if ss == 0.0 {
        return t_min;
    }
    (sl.abs() / ss).max(t_min)
}

const MAX_BACKTRACK_DOUBLINGS: usize = 60;

/// Backtracking x-update: solve the subproblem with the Bregman term scaled
/// by t, growing t by ρ until the sufficient-decrease test
///
///   Q(x⁺, ŷ) + f(x⁺) ≤ Q(x̂, ŷ) + f(x̂) − (δ/2)‖x⁺ − x̂‖²
///
/// holds. Returns the accepted point and the accepted scale.
pub fn backtrack_x_update<P: Problem + ?Sized>(
    problem: &P,
    hat: &Iterate,
    t0: f64,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, f64)> {
    let grad_f_hat = problem.f_grad(&hat.x);
    backtrack_with_grad(problem, hat, &grad_f_hat, t0, cfg)
}

fn backtrack_with_grad<P: Problem + ?Sized>(
    problem: &P,
    hat: &Iterate,
    grad_f_hat: &[f64],
    t0: f64,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, f64)> {
    let bt = cfg
        .backtracking
        .ok_or_else(|| Error::InvalidConfig("backtracking is not enabled".into()))?;
    let mut t = t0.max(bt.t_min);
    let reference = problem.q_value(&hat.x, &hat.y) + problem.f_value(&hat.x);
    if !reference.is_finite() {
        return Err(Error::DomainViolation(
            "hat point outside dom Q in the backtracking test".into(),
        ));
    }
    // allowance for rounding noise once steps shrink to fp resolution
    let noise = 1e-14 * (1.0 + reference.abs());
    for _ in 0..=MAX_BACKTRACK_DOUBLINGS {
        let x = problem.solve_x(&hat.y, &hat.x, grad_f_hat, &cfg.bregman_x, t)?;
        let trial = problem.q_value(&x, &hat.y) + problem.f_value(&x);
        let step_sq = norm_diff_sq(&x, &hat.x);
        if trial <= reference - 0.5 * bt.delta * step_sq + noise {
            return Ok((x, t));
        }
        t *= bt.rho;
    }
    Err(Error::BacktrackDivergence(MAX_BACKTRACK_DOUBLINGS))
}

/// Objective guarded by the generator domains: a candidate outside either
/// kernel domain is treated as +∞ so the gate rejects it and hat points stay
/// admissible for the next subproblems.
fn guarded_objective<P: Problem + ?Sized>(problem: &P, cfg: &SolverConfig, z: &Iterate) -> f64 {
    if !cfg.bregman_x.domain_contains(&z.x) || !cfg.bregman_y.domain_contains(&z.y) {
        return f64::INFINITY;
    }
    problem.objective(&z.x, &z.y)
}

/// Run the full iteration from z₀ (hat pair initialized to z₀, both negative
/// history slots set to z₀) until E_k < tol or the budget is spent.
pub fn run<P: Problem + ?Sized>(
    problem: &P,
    z0: &Iterate,
    mut cfg: SolverConfig,
) -> Result<RunTrace> {
    cfg.validate(problem)?;
    check_dims(z0.x.len(), problem.dim_x())?;
    check_dims(z0.y.len(), problem.dim_y())?;
    if !cfg.bregman_x.domain_contains(&z0.x) || !cfg.bregman_y.domain_contains(&z0.y) {
        return Err(Error::DomainViolation(
            "starting point outside a generator domain".into(),
        ));
    }
    let initial_objective = problem.objective(&z0.x, &z0.y);
    if !initial_objective.is_finite() {
        return Err(Error::DomainViolation("starting point outside dom Q".into()));
    }

    let clock = Instant::now();
    let mut rows: Vec<TraceRow> = Vec::new();
    let mut retained = cfg.retain_iterates.then(|| RetainedIterates {
        plain: vec![z0.clone()],
        hats: Vec::new(),
    });

    let mut z_prev = z0.clone();
    let mut z_cur = z0.clone();
    let mut z_hat = z0.clone();
    let mut l_cur = initial_objective;
    let mut extrapolation_count = 0usize;
    let mut converged = false;

    // backtracking state: warm-start scale and the BB displacement pair
    let mut warm_t = cfg.backtracking.map_or(1.0, |bt| bt.t_min);
    let mut bb_history: Option<(Vec<f64>, Vec<f64>)> = None;

    for k in 0..cfg.max_iter {
        let (alpha, beta) = cfg.schedule.next()?;
        if let Some(r) = retained.as_mut() {
            r.hats.push(z_hat.clone());
        }

        let grad_f_hat = problem.f_grad(&z_hat.x);
        let (x_new, t_x) = match cfg.backtracking {
            None => (
                problem.solve_x(&z_hat.y, &z_hat.x, &grad_f_hat, &cfg.bregman_x, 1.0)?,
                1.0,
            ),
            Some(bt) => {
                let t0 = if cfg.bb_init {
                    match &bb_history {
                        Some((hat_x_prev, grad_hat_prev)) => {
                            let grad_at_cur = problem.f_grad(&z_cur.x);
                            bb_stepsize(&grad_at_cur, grad_hat_prev, &z_cur.x, hat_x_prev, bt.t_min)
                        }
                        None => bt.t_min,
                    }
                } else {
                    warm_t
                };
                let (x, t) = backtrack_with_grad(problem, &z_hat, &grad_f_hat, t0, &cfg)?;
                warm_t = t;
                (x, t)
            }
        };
        if cfg.backtracking.is_some() && cfg.bb_init {
            bb_history = Some((z_hat.x.clone(), grad_f_hat));
        }

        let grad_g_hat = problem.g_grad(&z_hat.y);
        let y_new = problem.solve_y(&x_new, &z_hat.y, &grad_g_hat, &cfg.bregman_y, 1.0)?;
        let z_new = Iterate { x: x_new, y: y_new };

        let l_plain = problem.objective(&z_new.x, &z_new.y);
        if !l_plain.is_finite() {
            return Err(Error::SubproblemFailure(
                "objective not finite at the new iterate".into(),
            ));
        }
        if l_plain > l_cur + 1e-9 * (1.0 + l_cur.abs()) {
            return Err(Error::NonDescent {
                k,
                from: l_cur,
                to: l_plain,
            });
        }

        let candidate = extrapolate(&z_new, &z_cur, &z_prev, alpha, beta)?;
        let l_extrap = guarded_objective(problem, &cfg, &candidate);
        let accepted = monotone_gate(l_extrap, l_plain);
        cfg.schedule.after_gate(accepted);
        let (z_hat_next, l_hat) = if accepted {
            extrapolation_count += 1;
            (candidate, l_extrap)
        } else {
            (z_new.clone(), l_plain)
        };

        let e = residual(&z_new, &z_cur)?;
        rows.push(TraceRow {
            k,
            residual: e,
            objective: l_plain,
            objective_hat: l_hat,
            accepted,
            alpha,
            beta,
            stepsize_x: t_x,
            stepsize_y: 1.0,
            elapsed_seconds: clock.elapsed().as_secs_f64(),
        });
        if let Some(r) = retained.as_mut() {
            r.plain.push(z_new.clone());
        }

        z_prev = std::mem::replace(&mut z_cur, z_new);
        z_hat = z_hat_next;
        l_cur = l_plain;

        if e < cfg.tol {
            converged = true;
            break;
        }
    }

    let summary = RunSummary {
        iterations: rows.len(),
        wall_time_seconds: clock.elapsed().as_secs_f64(),
        extrapolation_count,
        converged,
        final_point: z_cur,
    };
    Ok(RunTrace {
        initial_objective,
        rows,
        summary,
        retained,
    })
}
