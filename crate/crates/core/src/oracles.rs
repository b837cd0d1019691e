//! Independent verification oracles used by the test suite.
//!
//! Nothing in here calls solver or problem closed-form code; the point is to
//! check those paths against brute force (1-D grids), finite differences and
//! random feasible perturbations.

use crate::error::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Hard cap on the number of 1-D grid points per call.
pub const GRID_BUDGET: usize = 10_000_000;

/// A uniform 1-D evaluation grid.
#[derive(Clone, Copy, Debug)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo < hi) || !(step > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "grid needs lo < hi and step > 0, got [{lo}, {hi}] step {step}"
            )));
        }
        Ok(Self { lo, hi, step })
    }

    fn points(&self) -> usize {
        ((self.hi - self.lo) / self.step).floor() as usize + 1
    }
}

/// Brute-force argmin of a scalar objective over the grid.
///
/// Ties break left-to-right: the first minimum wins. Returns the argmin and
/// the objective value there.
pub fn grid_argmin_1d(objective: impl Fn(f64) -> f64, grid: &GridSpec) -> Result<(f64, f64)> {
    GridSpec::new(grid.lo, grid.hi, grid.step)?;
    let n = grid.points();
    if n > GRID_BUDGET {
        return Err(Error::BudgetExceeded {
            points: n,
            max: GRID_BUDGET,
        });
    }
    let mut best_x = grid.lo;
    let mut best_v = objective(grid.lo);
    for i in 1..n {
        let x = grid.lo + i as f64 * grid.step;
        let v = objective(x);
        if v < best_v {
            best_v = v;
            best_x = x;
        }
    }
    Ok((best_x, best_v))
}

/// Central finite-difference gradient with per-coordinate step h·(1 + |xᵢ|).
pub fn fd_gradient(value: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut grad = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let hi = h * (1.0 + x[i].abs());
        probe[i] = x[i] + hi;
        let fp = value(&probe);
        probe[i] = x[i] - hi;
        let fm = value(&probe);
        probe[i] = x[i];
        grad[i] = (fp - fm) / (2.0 * hi);
    }
    grad
}

/// Improvement threshold below which a perturbation does not count as better.
pub const PERTURBATION_SLACK: f64 = 1e-9;

/// Checks local optimality of `candidate` against random feasible Gaussian
/// perturbations of the given magnitude. Returns `true` when no feasible
/// perturbation improves the objective by more than [`PERTURBATION_SLACK`].
pub fn perturbation_optimality(
    objective: impl Fn(&[f64]) -> f64,
    candidate: &[f64],
    feasible: impl Fn(&[f64]) -> bool,
    trials: usize,
    magnitude: f64,
    seed: u64,
) -> bool {
    let base = objective(candidate);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probe = candidate.to_vec();
    for _ in 0..trials {
        for (p, c) in probe.iter_mut().zip(candidate) {
            let g: f64 = StandardNormal.sample(&mut rng);
            *p = c + magnitude * g;
        }
        if !feasible(&probe) {
            continue;
        }
        if objective(&probe) < base - PERTURBATION_SLACK {
            return false;
        }
    }
    true
}
