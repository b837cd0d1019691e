//! Capped-ℓ1 regularized logistic regression.
//!
//! The unsplit problem is min (1/n) Σ log(1 + exp(−bᵢaᵢᵀx)) + λ Σ min(|xⱼ|, θ).
//! Splitting the regularizer onto an auxiliary block and penalizing gives
//!
//!   L(x, y) = f(x) + λ Σ min(|yⱼ|, θ) + (μ/2)‖x − y‖²,   g ≡ 0,
//!
//! with f the logistic loss. The y-update reduces to the capped-ℓ1 proximal
//! map, which has a two-candidate closed form per coordinate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bregman::{BregmanGenerator, Kind};
use crate::error::{Error, Result};
use crate::problems::{stable_positive_root, Problem};
use crate::vecmath::{check_dims, dot, norm_diff_sq};

/// Default lower edge of the Itakura–Saito working box for regression runs.
pub const LOGREG_DOMAIN_FLOOR: f64 = 1e-6;

/// Upper edge of the declared working box; regression iterates stay far
/// inside it, the constant only keeps the generator well-defined.
const LOGREG_DOMAIN_UPPER: f64 = 1e6;

/// Label noise rate used by the synthetic generator.
const LABEL_FLIP_RATE: f64 = 0.05;

/// One synthetic sparse-logistic-regression instance.
#[derive(Clone, Debug)]
pub struct LogRegInstance {
    /// n×d sample matrix, row-major (row i = aᵢ).
    features: Vec<f64>,
    /// Labels in {−1, +1}.
    labels: Vec<f64>,
    n: usize,
    d: usize,
    lambda: f64,
    theta_cap: f64,
    mu: f64,
    seed: u64,
}

/// Generate a seeded synthetic instance: standard-normal features, labels
/// from a planted Gaussian weight vector with signs flipped at rate 0.05.
/// Defaults: λ = 10⁻³, θ = 0.1·λ, μ = 1.
pub fn gen_logreg(n: usize, d: usize, seed: u64) -> LogRegInstance {
    assert!(n >= 1 && d >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let features: Vec<f64> = (0..n * d).map(|_| StandardNormal.sample(&mut rng)).collect();
    let planted: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
    let labels: Vec<f64> = (0..n)
        .map(|i| {
            let margin = dot(&features[i * d..(i + 1) * d], &planted);
            let label = if margin >= 0.0 { 1.0 } else { -1.0 };
            if rng.random::<f64>() < LABEL_FLIP_RATE {
                -label
            } else {
                label
            }
        })
        .collect();
    let lambda = 1e-3;
    LogRegInstance::with_seed(features, labels, lambda, 0.1 * lambda, 1.0, seed)
        .expect("generated instance is valid")
}

impl LogRegInstance {
    pub fn new(
        features: Vec<f64>,
        labels: Vec<f64>,
        lambda: f64,
        theta_cap: f64,
        mu: f64,
    ) -> Result<Self> {
        Self::with_seed(features, labels, lambda, theta_cap, mu, 0)
    }

    fn with_seed(
        features: Vec<f64>,
        labels: Vec<f64>,
        lambda: f64,
        theta_cap: f64,
        mu: f64,
        seed: u64,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 || features.len() % n != 0 {
            return Err(Error::DimensionMismatch {
                left: features.len(),
                right: n,
            });
        }
        let d = features.len() / n;
        if labels.iter().any(|&b| b != 1.0 && b != -1.0) {
            return Err(Error::InvalidConfig("labels must lie in {-1, +1}".into()));
        }
        if lambda <= 0.0 || theta_cap <= 0.0 || mu <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "lambda, theta and mu must be positive, got {lambda}, {theta_cap}, {mu}"
            )));
        }
        Ok(Self {
            features,
            labels,
            n,
            d,
            lambda,
            theta_cap,
            mu,
            seed,
        })
    }

    pub fn with_mu(mut self, mu: f64) -> Result<Self> {
        if mu <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "penalty must be positive, got {mu}"
            )));
        }
        self.mu = mu;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn theta_cap(&self) -> f64 {
        self.theta_cap
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// Loss and gradient in one pass, guarded against exp overflow:
    /// log(1 + e^z) = max(z, 0) + log1p(e^{−|z|}).
    pub fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let inv_n = 1.0 / self.n as f64;
        let mut value = 0.0;
        let mut grad = vec![0.0; self.d];
        for i in 0..self.n {
            let row = &self.features[i * self.d..(i + 1) * self.d];
            let margin = self.labels[i] * dot(row, x);
            value += (-margin).max(0.0) + (-margin.abs()).exp().ln_1p();
            let sig = if margin >= 0.0 {
                let e = (-margin).exp();
                e / (1.0 + e)
            } else {
                1.0 / (1.0 + margin.exp())
            };
            let w = -self.labels[i] * sig * inv_n;
            for (gj, aj) in grad.iter_mut().zip(row) {
                *gj += w * aj;
            }
        }
        (value * inv_n, grad)
    }

    /// Global curvature bound ‖A‖₂²/(4n) on the logistic Hessian; the run
    /// itself treats the constant as unknown and backtracks instead.
    pub fn curvature_bound(&self) -> f64 {
        let m = nalgebra::DMatrix::from_row_slice(self.n, self.d, &self.features);
        let sigma = m.singular_values().max();
        sigma * sigma / (4.0 * self.n as f64)
    }

    /// Default x-block generator with unit scaling; the backtracking stepsize
    /// carries the curvature.
    pub fn default_generator_x(&self, kind: Kind) -> BregmanGenerator {
        match kind {
            Kind::SquaredEuclidean => BregmanGenerator::squared_euclidean(1.0).unwrap(),
            Kind::ItakuraSaito => {
                BregmanGenerator::itakura_saito(1.0, LOGREG_DOMAIN_FLOOR, LOGREG_DOMAIN_UPPER)
                    .unwrap()
            }
        }
    }

    /// Default y-block generator, squared Euclidean with η = 1.1·max(L_∇g, 1);
    /// g ≡ 0 here so η = 1.1.
    pub fn default_generator_y(&self) -> BregmanGenerator {
        BregmanGenerator::squared_euclidean(1.1).unwrap()
    }

    /// Random starting pair with y₀ = x₀; positive-orthant start for
    /// Itakura–Saito runs.
    pub fn sample_start(&self, kind: Kind, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ super::qp::START_STREAM_OFFSET);
        let g: Vec<f64> = (0..self.d)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let x: Vec<f64> = match kind {
            Kind::SquaredEuclidean => g.iter().map(|v| 0.1 * v).collect(),
            Kind::ItakuraSaito => g.iter().map(|v| 0.1 * v.abs() + 0.01).collect(),
        };
        (x.clone(), x)
    }

    /// Flat text serialization: header `logreg n d lambda theta mu seed`,
    /// then the sample rows and the label line, 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "logreg {} {} {:.16e} {:.16e} {:.16e} {}\n",
            self.n, self.d, self.lambda, self.theta_cap, self.mu, self.seed
        ));
        for i in 0..self.n {
            let row: Vec<String> = self.features[i * self.d..(i + 1) * self.d]
                .iter()
                .map(|v| format!("{v:.16e}"))
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        let labels: Vec<String> = self.labels.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&labels.join(" "));
        out.push('\n');
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidConfig("empty instance text".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 7 || fields[0] != "logreg" {
            return Err(Error::InvalidConfig(format!("bad logreg header: {header}")));
        }
        let n: usize = super::qp::parse(fields[1])?;
        let d: usize = super::qp::parse(fields[2])?;
        let lambda: f64 = super::qp::parse(fields[3])?;
        let theta_cap: f64 = super::qp::parse(fields[4])?;
        let mu: f64 = super::qp::parse(fields[5])?;
        let seed: u64 = super::qp::parse(fields[6])?;
        let mut features = Vec::with_capacity(n * d);
        for _ in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| Error::InvalidConfig("truncated sample matrix".into()))?;
            for tok in line.split_whitespace() {
                features.push(super::qp::parse(tok)?);
            }
        }
        let label_line = lines
            .next()
            .ok_or_else(|| Error::InvalidConfig("missing labels".into()))?;
        let labels: Vec<f64> = label_line
            .split_whitespace()
            .map(super::qp::parse)
            .collect::<Result<_>>()?;
        Self::with_seed(features, labels, lambda, theta_cap, mu, seed)
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Proximal map of y ↦ weight·min(|y|, θ) at u, one coordinate.
///
/// Two candidates cover the two branches of the capped penalty: the identity
/// branch clamped outward to |y| ≥ θ and the soft-threshold branch clamped
/// inward to |y| ≤ θ. Whichever yields the smaller objective wins; ties take
/// the candidate of smaller magnitude.
pub fn capped_l1_prox_scalar(u: f64, weight: f64, theta_cap: f64) -> f64 {
    let s = sign(u);
    let au = u.abs();
    let outer = s * au.max(theta_cap);
    let inner = s * theta_cap.min((au - weight).max(0.0));
    let h = |y: f64| weight * y.abs().min(theta_cap) + 0.5 * (y - u) * (y - u);
    if h(inner) <= h(outer) {
        inner
    } else {
        outer
    }
}

/// Coordinate-wise capped-ℓ1 proximal map.
pub fn capped_l1_prox(u: &[f64], weight: f64, theta_cap: f64) -> Vec<f64> {
    u.iter()
        .map(|&v| capped_l1_prox_scalar(v, weight, theta_cap))
        .collect()
}

impl Problem for LogRegInstance {
    fn dim_x(&self) -> usize {
        self.d
    }

    fn dim_y(&self) -> usize {
        self.d
    }

    fn f_value(&self, x: &[f64]) -> f64 {
        self.value_grad(x).0
    }

    fn f_grad(&self, x: &[f64]) -> Vec<f64> {
        self.value_grad(x).1
    }

    fn g_value(&self, _y: &[f64]) -> f64 {
        0.0
    }

    fn g_grad(&self, y: &[f64]) -> Vec<f64> {
        vec![0.0; y.len()]
    }

    fn q_value(&self, x: &[f64], y: &[f64]) -> f64 {
        let capped: f64 = y.iter().map(|v| v.abs().min(self.theta_cap)).sum();
        self.lambda * capped + 0.5 * self.mu * norm_diff_sq(x, y)
    }

    fn q_grad_x(&self, x: &[f64], y: &[f64]) -> Option<Vec<f64>> {
        Some(
            x.iter()
                .zip(y)
                .map(|(xi, yi)| self.mu * (xi - yi))
                .collect(),
        )
    }

    fn lip_f(&self) -> Option<f64> {
        // treated as unknown: the experiment protocol backtracks instead
        None
    }

    fn lip_g(&self) -> Option<f64> {
        Some(0.0)
    }

    fn xi(&self) -> Option<f64> {
        Some(self.mu)
    }

    /// x-subproblem: argmin (μ/2)‖x − ŷ‖² + ⟨∇f(x̂), x⟩ + t·D_φ₁(x, x̂).
    ///
    /// Squared Euclidean: x = (μŷ + tγx̂ − ∇f(x̂))/(μ + tγ). Itakura–Saito:
    /// per-coordinate positive root of μx² + (tγ/x̂ᵢ + ∇f(x̂)ᵢ − μŷᵢ)x − tγ = 0.
    fn solve_x(
        &self,
        y_hat: &[f64],
        x_hat: &[f64],
        grad_f_hat: &[f64],
        gen: &BregmanGenerator,
        scale: f64,
    ) -> Result<Vec<f64>> {
        check_dims(x_hat.len(), self.d)?;
        check_dims(y_hat.len(), self.d)?;
        check_dims(grad_f_hat.len(), self.d)?;
        if scale <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "subproblem scale must be positive, got {scale}"
            )));
        }
        match *gen {
            BregmanGenerator::SquaredEuclidean { gamma } => {
                let w = scale * gamma;
                Ok(x_hat
                    .iter()
                    .zip(y_hat.iter().zip(grad_f_hat))
                    .map(|(xh, (yh, gf))| (self.mu * yh + w * xh - gf) / (self.mu + w))
                    .collect())
            }
            BregmanGenerator::ItakuraSaito { gamma, floor, .. } => {
                if !gen.domain_contains(x_hat) {
                    return Err(Error::DomainViolation(
                        "x-block hat point left the Itakura-Saito domain".into(),
                    ));
                }
                let w = scale * gamma;
                let x: Vec<f64> = x_hat
                    .iter()
                    .zip(y_hat.iter().zip(grad_f_hat))
                    .map(|(xh, (yh, gf))| {
                        stable_positive_root(self.mu, w / xh + gf - self.mu * yh, w)
                    })
                    .collect();
                if x.iter().any(|&v| v < floor) {
                    return Err(Error::DomainViolation(
                        "x-subproblem solution crossed the Itakura-Saito floor".into(),
                    ));
                }
                Ok(x)
            }
        }
    }

    /// y-subproblem: capped-ℓ1 prox at u = (ηŷ + μx⁺)/(μ + η) with weight
    /// λ/(μ + η); squared Euclidean generator only.
    fn solve_y(
        &self,
        x_new: &[f64],
        y_hat: &[f64],
        _grad_g_hat: &[f64],
        gen: &BregmanGenerator,
        scale: f64,
    ) -> Result<Vec<f64>> {
        check_dims(x_new.len(), self.d)?;
        check_dims(y_hat.len(), self.d)?;
        let eta = match *gen {
            BregmanGenerator::SquaredEuclidean { gamma } => scale * gamma,
            BregmanGenerator::ItakuraSaito { .. } => {
                return Err(Error::UnsupportedGenerator(
                    "the capped-l1 y-update has a closed form only for the squared Euclidean kernel"
                        .into(),
                ))
            }
        };
        let denom = self.mu + eta;
        let u: Vec<f64> = y_hat
            .iter()
            .zip(x_new)
            .map(|(yh, x)| (eta * yh + self.mu * x) / denom)
            .collect();
        Ok(capped_l1_prox(&u, self.lambda / denom, self.theta_cap))
    }
}
