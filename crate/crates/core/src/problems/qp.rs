//! Penalized nonconvex quadratic programming over a Euclidean ball.
//!
//! The underlying problem is min ½yᵀAy + bᵀy subject to y ∈ S with S a ball
//! of radius r and A symmetric but in general indefinite. Splitting the
//! variable and penalizing the coupling gives
//!
//!   L(x, y) = ι_S(x) + (μ/2)‖x − y‖² + ½yᵀAy + bᵀy,
//!
//! i.e. f ≡ 0, g(y) = ½yᵀAy + bᵀy, Q(x, y) = ι_S(x) + (μ/2)‖x − y‖².

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bregman::{BregmanGenerator, Kind};
use crate::error::{Error, Result};
use crate::problems::{stable_positive_root, Problem};
use crate::vecmath::{check_dims, dot, norm};

/// Default lower edge of the Itakura–Saito working box.
pub const QP_DOMAIN_FLOOR: f64 = 1e-6;

/// Relative slack when testing ball membership, absorbing projection rounding.
const BALL_SLACK: f64 = 1e-12;

/// Scaling-seed offset so starting points use a stream distinct from the
/// instance data.
pub(crate) const START_STREAM_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

/// One ball-constrained QP instance.
#[derive(Clone, Debug)]
pub struct QpInstance {
    /// Symmetric n×n matrix, row-major.
    a: Vec<f64>,
    b: Vec<f64>,
    n: usize,
    radius: f64,
    mu: f64,
    /// Spectral norm of A = Lipschitz constant of ∇g.
    lip: f64,
    seed: u64,
}

/// Generate a random instance: A = D + Dᵀ with D and b drawn from a seeded
/// standard normal stream (D row-major first, then b). The penalty defaults
/// to μ = 10·‖A‖₂, which keeps the objective coercive.
pub fn gen_qp(n: usize, radius: f64, seed: u64) -> QpInstance {
    assert!(n >= 1 && radius > 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d: Vec<f64> = (0..n * n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let b: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = d[i * n + j] + d[j * n + i];
        }
    }
    let lip = spectral_norm(&a, n);
    QpInstance::with_seed(a, b, radius, 10.0 * lip, seed).expect("generated instance is valid")
}

fn spectral_norm(a: &[f64], n: usize) -> f64 {
    let m = nalgebra::DMatrix::from_row_slice(n, n, a);
    m.symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(0.0, |acc, &l| acc.max(l.abs()))
}

impl QpInstance {
    /// Build an instance from explicit data. A must be exactly symmetric.
    pub fn new(a: Vec<f64>, b: Vec<f64>, radius: f64, mu: f64) -> Result<Self> {
        Self::with_seed(a, b, radius, mu, 0)
    }

    fn with_seed(a: Vec<f64>, b: Vec<f64>, radius: f64, mu: f64, seed: u64) -> Result<Self> {
        let n = b.len();
        if a.len() != n * n {
            return Err(Error::DimensionMismatch {
                left: a.len(),
                right: n * n,
            });
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if a[i * n + j] != a[j * n + i] {
                    return Err(Error::InvalidConfig(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        if radius <= 0.0 || mu <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "radius and penalty must be positive, got r={radius}, mu={mu}"
            )));
        }
        let lip = spectral_norm(&a, n);
        Ok(Self {
            a,
            b,
            n,
            radius,
            mu,
            lip,
            seed,
        })
    }

    /// Replace the penalty parameter, keeping everything else.
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

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn matrix(&self) -> &[f64] {
        &self.a
    }

    pub fn linear_term(&self) -> &[f64] {
        &self.b
    }

    /// Spectral norm of A, the Lipschitz constant of ∇g.
    pub fn grad_g_lipschitz(&self) -> f64 {
        self.lip
    }

    /// The f-block is identically zero, so any positive constant works as its
    /// Lipschitz bound; the generator sizing convention reuses the g constant.
    pub fn grad_f_lipschitz(&self) -> f64 {
        self.lip
    }

    fn a_mul(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| dot(&self.a[i * self.n..(i + 1) * self.n], v))
            .collect()
    }

    fn in_ball(&self, x: &[f64]) -> bool {
        norm(x) <= self.radius * (1.0 + BALL_SLACK) + BALL_SLACK
    }

    /// Default x-block generator: squared Euclidean with γ = 1.1·max(L, 1),
    /// or Itakura–Saito sized on the working box [floor, r]ⁿ so that its
    /// strong-convexity modulus still exceeds the Lipschitz constant.
    pub fn default_generator_x(&self, kind: Kind) -> BregmanGenerator {
        let base = 1.1 * self.grad_f_lipschitz().max(1.0);
        match kind {
            Kind::SquaredEuclidean => BregmanGenerator::squared_euclidean(base).unwrap(),
            Kind::ItakuraSaito => BregmanGenerator::itakura_saito(
                base * self.radius * self.radius,
                QP_DOMAIN_FLOOR,
                self.radius,
            )
            .unwrap(),
        }
    }

    /// Default y-block generator, squared Euclidean with λ = 1.1·max(L, 1).
    pub fn default_generator_y(&self) -> BregmanGenerator {
        BregmanGenerator::squared_euclidean(1.1 * self.grad_g_lipschitz().max(1.0)).unwrap()
    }

    /// Random feasible starting pair (x₀, y₀) with y₀ = x₀, drawn from a
    /// stream separate from the instance data. Itakura–Saito runs start in
    /// the positive orthant.
    pub fn sample_start(&self, kind: Kind, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ START_STREAM_OFFSET);
        let g: Vec<f64> = (0..self.n)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let x = match kind {
            Kind::SquaredEuclidean => {
                let s = 0.5 * self.radius / norm(&g).max(1e-12);
                g.iter().map(|v| s * v).collect::<Vec<f64>>()
            }
            Kind::ItakuraSaito => {
                let v: Vec<f64> = g.iter().map(|t| t.abs().max(0.01)).collect();
                let s = 0.5 * self.radius / norm(&v);
                v.iter()
                    .map(|t| (s * t).max(2.0 * QP_DOMAIN_FLOOR))
                    .collect()
            }
        };
        (x.clone(), x)
    }

    /// Serialize to the flat text format: a header line `qp n radius mu seed`
    /// followed by the matrix rows and the linear term, 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "qp {} {:.16e} {:.16e} {}\n",
            self.n, self.radius, self.mu, self.seed
        ));
        for i in 0..self.n {
            let row: Vec<String> = self.a[i * self.n..(i + 1) * self.n]
                .iter()
                .map(|v| format!("{v:.16e}"))
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        let b: Vec<String> = self.b.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&b.join(" "));
        out.push('\n');
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidConfig("empty instance text".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 5 || fields[0] != "qp" {
            return Err(Error::InvalidConfig(format!("bad qp header: {header}")));
        }
        let n: usize = parse(fields[1])?;
        let radius: f64 = parse(fields[2])?;
        let mu: f64 = parse(fields[3])?;
        let seed: u64 = parse(fields[4])?;
        let mut a = Vec::with_capacity(n * n);
        for _ in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| Error::InvalidConfig("truncated matrix".into()))?;
            for tok in line.split_whitespace() {
                a.push(parse(tok)?);
            }
        }
        let b_line = lines
            .next()
            .ok_or_else(|| Error::InvalidConfig("missing linear term".into()))?;
        let b: Vec<f64> = b_line
            .split_whitespace()
            .map(parse)
            .collect::<Result<_>>()?;
        Self::with_seed(a, b, radius, mu, seed)
    }
}

pub(crate) fn parse<T: std::str::FromStr>(tok: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::InvalidConfig(format!("cannot parse field '{tok}'")))
}

impl Problem for QpInstance {
    fn dim_x(&self) -> usize {
        self.n
    }

    fn dim_y(&self) -> usize {
        self.n
    }

    fn f_value(&self, _x: &[f64]) -> f64 {
        0.0
    }

    fn f_grad(&self, x: &[f64]) -> Vec<f64> {
        vec![0.0; x.len()]
    }

    fn g_value(&self, y: &[f64]) -> f64 {
        0.5 * dot(&self.a_mul(y), y) + dot(&self.b, y)
    }

    fn g_grad(&self, y: &[f64]) -> Vec<f64> {
        let mut g = self.a_mul(y);
        for (gi, bi) in g.iter_mut().zip(&self.b) {
            *gi += bi;
        }
        g
    }

    fn q_value(&self, x: &[f64], y: &[f64]) -> f64 {
        if !self.in_ball(x) {
            return f64::INFINITY;
        }
        0.5 * self.mu * crate::vecmath::norm_diff_sq(x, y)
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
        Some(self.grad_f_lipschitz())
    }

    fn lip_g(&self) -> Option<f64> {
        Some(self.lip)
    }

    fn xi(&self) -> Option<f64> {
        Some(self.mu)
    }

    /// x-subproblem: argmin over the ball of (μ/2)‖x − ŷ‖² + t·D_φ₁(x, x̂).
    ///
    /// Squared Euclidean: radial projection of the weighted average
    /// (μŷ + tγx̂)/(μ + tγ). Itakura–Saito: per-coordinate positive root of
    /// (μ + ν)x² + (tγ/x̂ᵢ − μŷᵢ)x − tγ = 0 with the ball multiplier ν ≥ 0
    /// located by bisection on ‖x(ν)‖ = r.
    fn solve_x(
        &self,
        y_hat: &[f64],
        x_hat: &[f64],
        _grad_f_hat: &[f64],
        gen: &BregmanGenerator,
        scale: f64,
    ) -> Result<Vec<f64>> {
        check_dims(x_hat.len(), self.n)?;
        check_dims(y_hat.len(), self.n)?;
        if scale <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "subproblem scale must be positive, got {scale}"
            )));
        }
        match *gen {
            BregmanGenerator::SquaredEuclidean { gamma } => {
                let w = scale * gamma;
                let mut x: Vec<f64> = x_hat
                    .iter()
                    .zip(y_hat)
                    .map(|(xh, yh)| (self.mu * yh + w * xh) / (self.mu + w))
                    .collect();
                let nrm = norm(&x);
                if nrm > self.radius {
                    let s = self.radius / nrm;
                    for v in &mut x {
                        *v *= s;
                    }
                }
                Ok(x)
            }
            BregmanGenerator::ItakuraSaito { gamma, floor, .. } => {
                if !gen.domain_contains(x_hat) {
                    return Err(Error::DomainViolation(
                        "x-block hat point left the Itakura-Saito domain".into(),
                    ));
                }
                let w = scale * gamma;
                let roots = |nu: f64| -> Vec<f64> {
                    x_hat
                        .iter()
                        .zip(y_hat)
                        .map(|(xh, yh)| {
                            stable_positive_root(self.mu + nu, w / xh - self.mu * yh, w)
                        })
                        .collect()
                };
                let mut x = roots(0.0);
                if norm(&x) > self.radius {
                    // expand until the multiplier brackets the ball radius
                    let mut hi = 1.0;
                    let mut tries = 0;
                    while norm(&roots(hi)) > self.radius {
                        hi *= 2.0;
                        tries += 1;
                        if tries > 200 {
                            return Err(Error::BisectionFailure);
                        }
                    }
                    let mut lo = 0.0;
                    for _ in 0..200 {
                        let mid = 0.5 * (lo + hi);
                        if norm(&roots(mid)) > self.radius {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    x = roots(hi);
                }
                if x.iter().any(|&v| v < floor) {
                    return Err(Error::DomainViolation(
                        "x-subproblem solution crossed the Itakura-Saito floor".into(),
                    ));
                }
                Ok(x)
            }
        }
    }

    /// y-subproblem closed form (μ x⁺ + λŷ − Aŷ − b)/(μ + λ), squared
    /// Euclidean generator only.
    fn solve_y(
        &self,
        x_new: &[f64],
        y_hat: &[f64],
        grad_g_hat: &[f64],
        gen: &BregmanGenerator,
        scale: f64,
    ) -> Result<Vec<f64>> {
        check_dims(x_new.len(), self.n)?;
        check_dims(y_hat.len(), self.n)?;
        let lam = match *gen {
            BregmanGenerator::SquaredEuclidean { gamma } => scale * gamma,
            BregmanGenerator::ItakuraSaito { .. } => {
                return Err(Error::UnsupportedGenerator(
                    "the QP y-update has a closed form only for the squared Euclidean kernel"
                        .into(),
                ))
            }
        };
        Ok(x_new
            .iter()
            .zip(y_hat.iter().zip(grad_g_hat))
            .map(|(x, (yh, gh))| (self.mu * x + lam * yh - gh) / (self.mu + lam))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{grid_argmin_1d, perturbation_optimality, GridSpec};
    use approx::assert_relative_eq;

    fn tiny(a: Vec<f64>, b: Vec<f64>, radius: f64, mu: f64) -> QpInstance {
        QpInstance::new(a, b, radius, mu).unwrap()
    }

    #[test]
    fn generation_is_deterministic_and_symmetric() {
        let p1 = gen_qp(20, 2.0, 42);
        let p2 = gen_qp(20, 2.0, 42);
        assert_eq!(p1.matrix(), p2.matrix());
        assert_eq!(p1.linear_term(), p2.linear_term());
        let n = p1.n();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(p1.matrix()[i * n + j], p1.matrix()[j * n + i]);
            }
        }
        assert!(gen_qp(20, 2.0, 43).matrix() != p1.matrix());
    }

    #[test]
    fn default_mu_is_ten_lipschitz() {
        let p = gen_qp(15, 2.0, 1);
        assert_relative_eq!(p.mu(), 10.0 * p.grad_g_lipschitz());
    }

    #[test]
    fn spectral_norm_matches_known_matrix() {
        // diag(3, -5) has spectral norm 5
        let p = tiny(vec![3.0, 0.0, 0.0, -5.0], vec![0.0, 0.0], 1.0, 1.0);
        assert_relative_eq!(p.grad_g_lipschitz(), 5.0, max_relative = 1e-12);
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        assert!(QpInstance::new(vec![1.0, 2.0, 3.0, 4.0], vec![0.0, 0.0], 1.0, 1.0).is_err());
    }

    #[test]
    fn y_update_formula() {
        let p = tiny(vec![0.0; 4], vec![0.0, 0.0], 2.0, 1.0);
        let gen = BregmanGenerator::squared_euclidean(1.0).unwrap();
        let grad = p.g_grad(&[0.0, 0.0]);
        let y = p.solve_y(&[2.0, 0.0], &[0.0, 0.0], &grad, &gen, 1.0).unwrap();
        assert_eq!(y, vec![1.0, 0.0]);
    }

    #[test]
    fn y_update_stationarity_on_random_instances() {
        for seed in 0..20 {
            let p = gen_qp(12, 2.0, seed);
            let gen = p.default_generator_y();
            let lam = gen.gamma();
            let (x, _) = p.sample_start(Kind::SquaredEuclidean, seed);
            let y_hat: Vec<f64> = x.iter().map(|v| v * 0.7 + 0.05).collect();
            let grad = p.g_grad(&y_hat);
            let y = p.solve_y(&x, &y_hat, &grad, &gen, 1.0).unwrap();
            // mu (y - x) + A y_hat + b + lam (y - y_hat) = 0
            let mut residual = 0.0;
            for i in 0..p.n() {
                let r = p.mu() * (y[i] - x[i]) + grad[i] + lam * (y[i] - y_hat[i]);
                residual += r * r;
            }
            assert!(residual.sqrt() < 1e-10, "residual {}", residual.sqrt());
        }
    }

    #[test]
    fn y_update_beats_random_perturbations() {
        let p = gen_qp(8, 2.0, 3);
        let gen = p.default_generator_y();
        let lam = gen.gamma();
        let (x, _) = p.sample_start(Kind::SquaredEuclidean, 3);
        let y_hat = vec![0.1; 8];
        let grad = p.g_grad(&y_hat);
        let y = p.solve_y(&x, &y_hat, &grad, &gen, 1.0).unwrap();
        let objective = |cand: &[f64]| {
            0.5 * p.mu() * crate::vecmath::norm_diff_sq(&x, cand)
                + dot(&grad, cand)
                + 0.5 * lam * crate::vecmath::norm_diff_sq(cand, &y_hat)
        };
        assert!(perturbation_optimality(objective, &y, |_| true, 200, 1e-4, 9));
    }

    #[test]
    fn y_update_rejects_is_generator() {
        let p = tiny(vec![0.0; 4], vec![0.0, 0.0], 2.0, 1.0);
        let gen = BregmanGenerator::itakura_saito(1.0, 1e-6, 2.0).unwrap();
        assert!(matches!(
            p.solve_y(&[1.0, 1.0], &[1.0, 1.0], &[0.0, 0.0], &gen, 1.0),
            Err(Error::UnsupportedGenerator(_))
        ));
    }

    #[test]
    fn x_update_euclid_interior_fixed_point() {
        let p = tiny(vec![0.0; 4], vec![0.0, 0.0], 2.0, 1.0);
        let gen = BregmanGenerator::squared_euclidean(1.0).unwrap();
        let x = p
            .solve_x(&[0.5, 0.0], &[0.5, 0.0], &[0.0, 0.0], &gen, 1.0)
            .unwrap();
        assert_eq!(x, vec![0.5, 0.0]);
    }

    #[test]
    fn x_update_euclid_projection_binds() {
        let p = tiny(vec![0.0; 4], vec![0.0, 0.0], 2.0, 1.0);
        let gen = BregmanGenerator::squared_euclidean(1.0).unwrap();
        let x = p
            .solve_x(&[4.0, 0.0], &[4.0, 0.0], &[0.0, 0.0], &gen, 1.0)
            .unwrap();
        assert_relative_eq!(x[0], 2.0, max_relative = 1e-14);
        assert_relative_eq!(x[1], 0.0);
    }

    #[test]
    fn x_update_is_one_dimensional_fixed_point() {
        // mu=1, gamma=1, y_hat=x_hat=1: x^2 + 0x - 1 = 0 -> x = 1.
        let p = tiny(vec![0.0], vec![0.0], 2.0, 1.0);
        let gen = BregmanGenerator::itakura_saito(1.0, 1e-6, 2.0).unwrap();
        let x = p.solve_x(&[1.0], &[1.0], &[0.0], &gen, 1.0).unwrap();
        assert_relative_eq!(x[0], 1.0, max_relative = 1e-14);

        // cross-check against a fine grid on (0, 2]
        let objective = |v: f64| {
            0.5 * (v - 1.0) * (v - 1.0) + (v / 1.0 - (v / 1.0_f64).ln() - 1.0)
        };
        let grid = GridSpec::new(1e-3, 2.0, 1e-6).unwrap();
        let (xg, _) = grid_argmin_1d(objective, &grid).unwrap();
        assert!((x[0] - xg).abs() < 1e-5);
    }

    #[test]
    fn x_update_is_ball_binding_satisfies_kkt() {
        for seed in 0..20 {
            let p = gen_qp(6, 1.0, seed);
            let gen = BregmanGenerator::itakura_saito(2.0, 1e-9, 1.0).unwrap();
            // pull far outside the ball so the constraint binds
            let y_hat = vec![3.0; 6];
            let x_hat = vec![0.4; 6];
            let x = p.solve_x(&y_hat, &x_hat, &[0.0; 6], &gen, 1.0).unwrap();
            assert!(norm(&x) <= 1.0 + 1e-9);
            assert!((norm(&x) - 1.0).abs() < 1e-10, "complementary slackness");
            // recover nu from the first coordinate and check the rest
            let w = 2.0;
            let nu = (w - (w / x_hat[0] - p.mu() * y_hat[0]) * x[0] - p.mu() * x[0] * x[0])
                / (x[0] * x[0]);
            assert!(nu >= -1e-8, "multiplier sign, nu = {nu}");
            for i in 0..6 {
                let r = (p.mu() + nu) * x[i] * x[i] + (w / x_hat[i] - p.mu() * y_hat[i]) * x[i] - w;
                assert!(r.abs() < 1e-8, "KKT residual {r}");
            }
        }
    }

    #[test]
    fn x_update_rejects_hat_outside_domain() {
        let p = tiny(vec![0.0], vec![0.0], 2.0, 1.0);
        let gen = BregmanGenerator::itakura_saito(1.0, 1e-6, 2.0).unwrap();
        assert!(matches!(
            p.solve_x(&[1.0], &[-0.5], &[0.0], &gen, 1.0),
            Err(Error::DomainViolation(_))
        ));
    }

    #[test]
    fn objective_reduces_to_quadratic_on_constraint_manifold() {
        let p = gen_qp(10, 2.0, 5);
        let (x, _) = p.sample_start(Kind::SquaredEuclidean, 5);
        let expected = p.g_value(&x);
        assert_relative_eq!(p.objective(&x, &x), expected, max_relative = 1e-12);
    }

    #[test]
    fn objective_infinite_outside_ball() {
        let p = tiny(vec![0.0; 4], vec![0.0, 0.0], 1.0, 1.0);
        assert!(p.objective(&[2.0, 0.0], &[0.0, 0.0]).is_infinite());
    }

    #[test]
    fn start_points_are_feasible() {
        let p = gen_qp(30, 2.0, 11);
        for seed in 0..10 {
            let (x, y) = p.sample_start(Kind::SquaredEuclidean, seed);
            assert_eq!(x, y);
            assert!(norm(&x) <= p.radius());
            let (xi, _) = p.sample_start(Kind::ItakuraSaito, seed);
            assert!(norm(&xi) <= p.radius());
            assert!(xi.iter().all(|&v| v >= QP_DOMAIN_FLOOR));
        }
    }

    #[test]
    fn text_round_trip_is_bitwise() {
        let p = gen_qp(7, 2.0, 99);
        let q = QpInstance::from_text(&p.to_text()).unwrap();
        assert_eq!(p.matrix(), q.matrix());
        assert_eq!(p.linear_term(), q.linear_term());
        assert_eq!(p.radius().to_bits(), q.radius().to_bits());
        assert_eq!(p.mu().to_bits(), q.mu().to_bits());
        assert_eq!(p.seed(), q.seed());
    }
}
