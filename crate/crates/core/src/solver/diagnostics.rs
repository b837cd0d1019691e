//! Trace-replay certificates for the solver's descent guarantees.
//!
//! Both certificates re-examine a recorded run (with iterate retention on)
//! against the inequalities the method is supposed to satisfy:
//!
//! * sufficient decrease — each iteration drops the objective by at least
//!   ρ‖z_{k+1} − ẑ_k‖² with ρ = min{(θ₁ − L_∇f)/2, (θ₂ − L_∇g)/2};
//! * subgradient bound — the canonical subgradient (p_x, p_y) assembled from
//!   gradient and kernel differences is bounded by ϱ‖z_{k+1} − ẑ_k‖ with
//!   ϱ² = max{2(L_∇f + η₁)², 2ξ² + 2(L_∇g + η₂)²}.
//!
//! Violations are reported by iteration index; an empty list certifies the
//! run. The comparison carries an absolute slack of 1e-8·(1 + |L(z₀)|) to
//! absorb floating-point noise in the recorded quantities.

use crate::error::{Error, Result};
use crate::problems::Problem;
use crate::solver::{RunTrace, SolverConfig};

/// Outcome of a certificate replay.
#[derive(Clone, Debug)]
pub struct CertificateReport {
    /// Iterations where the certified inequality failed.
    pub violations: Vec<usize>,
    /// Number of iterations examined.
    pub checked: usize,
    /// Absolute slack applied to the inequality.
    pub tol_cert: f64,
}

impl CertificateReport {
    pub fn is_certified(&self) -> bool {
        self.violations.is_empty()
    }
}

fn certificate_tolerance(trace: &RunTrace) -> f64 {
    1e-8 * (1.0 + trace.initial_objective.abs())
}

/// Check L(z_{k+1}) ≤ L(z_k) − ρ‖z_{k+1} − ẑ_k‖² on every recorded iteration.
pub fn certify_sufficient_decrease(trace: &RunTrace, rho_const: f64) -> Result<CertificateReport> {
    if rho_const <= 0.0 {
        return Err(Error::InvalidModulus(rho_const));
    }
    let retained = trace.retained.as_ref().ok_or(Error::MissingHatPoints)?;
    let tol_cert = certificate_tolerance(trace);
    let mut violations = Vec::new();
    for k in 0..trace.rows.len() {
        let step_sq = retained.plain[k + 1].diff_norm_sq(&retained.hats[k]);
        let bound = trace.objective_at(k) - rho_const * step_sq + tol_cert;
        if trace.rows[k].objective > bound {
            violations.push(k);
        }
    }
    Ok(CertificateReport {
        violations,
        checked: trace.rows.len(),
        tol_cert,
    })
}

/// Check ‖(p_x, p_y)‖ ≤ ϱ‖z_{k+1} − ẑ_k‖ at every recorded iteration, where
///
///   p_x = ∇ₓq(z_{k+1}) − ∇ₓq(x_{k+1}, ŷ_k)
///       + ∇f(x_{k+1}) − ∇f(x̂_k) − ∇φ₁(x_{k+1}) + ∇φ₁(x̂_k),
///   p_y = ∇g(y_{k+1}) − ∇g(ŷ_k) − ∇φ₂(y_{k+1}) + ∇φ₂(ŷ_k).
///
/// The generators must be the ones the run used.
pub fn certify_subgradient_bound<P: Problem + ?Sized>(
    problem: &P,
    trace: &RunTrace,
    cfg: &SolverConfig,
    varrho: f64,
) -> Result<CertificateReport> {
    if varrho <= 0.0 {
        return Err(Error::InvalidModulus(varrho));
    }
    let retained = trace.retained.as_ref().ok_or(Error::MissingHatPoints)?;
    let tol_cert = certificate_tolerance(trace);
    let mut violations = Vec::new();
    for k in 0..trace.rows.len() {
        let z_next = &retained.plain[k + 1];
        let hat = &retained.hats[k];

        let q_new = problem
            .q_grad_x(&z_next.x, &z_next.y)
            .ok_or(Error::MissingOracle)?;
        let q_hat = problem
            .q_grad_x(&z_next.x, &hat.y)
            .ok_or(Error::MissingOracle)?;
        let gf_new = problem.f_grad(&z_next.x);
        let gf_hat = problem.f_grad(&hat.x);
        let kx_new = cfg.bregman_x.phi_grad(&z_next.x)?;
        let kx_hat = cfg.bregman_x.phi_grad(&hat.x)?;

        let gg_new = problem.g_grad(&z_next.y);
        let gg_hat = problem.g_grad(&hat.y);
        let ky_new = cfg.bregman_y.phi_grad(&z_next.y)?;
        let ky_hat = cfg.bregman_y.phi_grad(&hat.y)?;

        let mut p_norm_sq = 0.0;
        for i in 0..z_next.x.len() {
            let px = q_new[i] - q_hat[i] + gf_new[i] - gf_hat[i] - kx_new[i] + kx_hat[i];
            p_norm_sq += px * px;
        }
        for j in 0..z_next.y.len() {
            let py = gg_new[j] - gg_hat[j] - ky_new[j] + ky_hat[j];
            p_norm_sq += py * py;
        }

        let rhs = varrho * z_next.diff_norm_sq(hat).sqrt() + tol_cert;
        if p_norm_sq.sqrt() > rhs {
            violations.push(k);
        }
    }
    Ok(CertificateReport {
        violations,
        checked: trace.rows.len(),
        tol_cert,
    })
}

/// ρ = min{(θ₁ − L_∇f)/2, (θ₂ − L_∇g)/2} from the run configuration; `None`
/// when a Lipschitz constant is unavailable.
pub fn sufficient_decrease_modulus<P: Problem + ?Sized>(
    problem: &P,
    cfg: &SolverConfig,
) -> Option<f64> {
    let lf = problem.lip_f()?;
    let lg = problem.lip_g()?;
    Some(((cfg.bregman_x.theta() - lf) / 2.0).min((cfg.bregman_y.theta() - lg) / 2.0))
}

/// ϱ = max{2(L_∇f + η₁)², 2ξ² + 2(L_∇g + η₂)²}^{1/2} from the run
/// configuration; `None` when a constant is unavailable.
pub fn subgradient_bound_modulus<P: Problem + ?Sized>(
    problem: &P,
    cfg: &SolverConfig,
) -> Option<f64> {
    let lf = problem.lip_f()?;
    let lg = problem.lip_g()?;
    let xi = problem.xi()?;
    let a = 2.0 * (lf + cfg.bregman_x.eta()).powi(2);
    let b = 2.0 * xi * xi + 2.0 * (lg + cfg.bregman_y.eta()).powi(2);
    Some(a.max(b).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bregman::{BregmanGenerator, Kind};
    use crate::problems::{gen_qp, QpInstance};
    use crate::schedules::ExtrapolationSchedule;
    use crate::solver::{run, Iterate};

    fn traced_qp_run(seed: u64) -> (QpInstance, SolverConfig, RunTrace) {
        let p = gen_qp(15, 2.0, seed);
        let cfg = SolverConfig::new(
            p.default_generator_x(Kind::SquaredEuclidean),
            p.default_generator_y(),
            ExtrapolationSchedule::constant(0.3, 0.2).unwrap(),
            1e-6,
            20_000,
        )
        .unwrap()
        .with_retention(true);
        let (x0, y0) = p.sample_start(Kind::SquaredEuclidean, seed);
        let trace = run(&p, &Iterate::new(x0, y0), cfg.clone()).unwrap();
        assert!(trace.summary.converged);
        (p, cfg, trace)
    }

    #[test]
    fn qp_run_passes_both_certificates() {
        for seed in 0..5 {
            let (p, cfg, trace) = traced_qp_run(seed);
            let rho = sufficient_decrease_modulus(&p, &cfg).unwrap();
            assert!(rho > 0.0);
            let report = certify_sufficient_decrease(&trace, rho).unwrap();
            assert!(report.is_certified(), "violations {:?}", report.violations);

            let varrho = subgradient_bound_modulus(&p, &cfg).unwrap();
            let report = certify_subgradient_bound(&p, &trace, &cfg, varrho).unwrap();
            assert!(report.is_certified(), "violations {:?}", report.violations);
        }
    }

    #[test]
    fn corrupted_objective_is_flagged_exactly_once() {
        let (p, cfg, mut trace) = traced_qp_run(3);
        let rho = sufficient_decrease_modulus(&p, &cfg).unwrap();
        let j = trace.rows.len() / 2;
        trace.rows[j].objective += 1.0;
        let report = certify_sufficient_decrease(&trace, rho).unwrap();
        assert_eq!(report.violations, vec![j]);
    }

    #[test]
    fn stationary_run_has_zero_subgradient() {
        // A = 0, b = 0: an interior point with x = y is a fixed point.
        let p = QpInstance::new(vec![0.0; 9], vec![0.0; 3], 2.0, 1.0).unwrap();
        let cfg = SolverConfig::new(
            BregmanGenerator::squared_euclidean(1.1).unwrap(),
            BregmanGenerator::squared_euclidean(1.1).unwrap(),
            ExtrapolationSchedule::constant(0.3, 0.2).unwrap(),
            1e-10,
            50,
        )
        .unwrap()
        .with_retention(true);
        let z0 = Iterate::new(vec![0.4, -0.2, 0.1], vec![0.4, -0.2, 0.1]);
        let trace = run(&p, &z0, cfg.clone()).unwrap();
        assert!(trace.summary.converged);
        let retained = trace.retained.as_ref().unwrap();
        for k in 0..trace.rows.len() {
            assert_eq!(retained.plain[k + 1].diff_norm_sq(&retained.hats[k]), 0.0);
        }
        // any positive varrho certifies; p vanishes identically
        let report = certify_subgradient_bound(&p, &trace, &cfg, 1e-12).unwrap();
        assert!(report.is_certified());
    }

    #[test]
    fn nonpositive_moduli_are_rejected() {
        let (_, _, trace) = traced_qp_run(1);
        assert!(matches!(
            certify_sufficient_decrease(&trace, 0.0),
            Err(Error::InvalidModulus(_))
        ));
        assert!(matches!(
            certify_sufficient_decrease(&trace, -1.0),
            Err(Error::InvalidModulus(_))
        ));
    }

    #[test]
    fn missing_retention_is_an_error() {
        let p = gen_qp(6, 2.0, 9);
        let cfg = SolverConfig::new(
            p.default_generator_x(Kind::SquaredEuclidean),
            p.default_generator_y(),
            ExtrapolationSchedule::constant(0.0, 0.0).unwrap(),
            1e-5,
            500,
        )
        .unwrap();
        let (x0, y0) = p.sample_start(Kind::SquaredEuclidean, 9);
        let trace = run(&p, &Iterate::new(x0, y0), cfg.clone()).unwrap();
        assert!(matches!(
            certify_sufficient_decrease(&trace, 1.0),
            Err(Error::MissingHatPoints)
        ));
        assert!(matches!(
            certify_subgradient_bound(&p, &trace, &cfg, 1.0),
            Err(Error::MissingHatPoints)
        ));
    }

    #[test]
    fn misdeclared_generator_breaks_subgradient_bound() {
        // Certifying with a kernel far stiffer than the one the run used
        // inflates the p vectors past the declared modulus.
        let (p, cfg, trace) = traced_qp_run(4);
        let varrho = subgradient_bound_modulus(&p, &cfg).unwrap();
        let mut wrong = cfg.clone();
        wrong.bregman_y =
            BregmanGenerator::squared_euclidean(1e4 * cfg.bregman_y.gamma()).unwrap();
        let report = certify_subgradient_bound(&p, &trace, &wrong, varrho).unwrap();
        assert!(!report.is_certified());
    }
}
