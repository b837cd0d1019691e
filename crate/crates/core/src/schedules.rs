//! Extrapolation-parameter schedules.
//!
//! A schedule produces the inertia pair (α_k, β_k) ahead of each iteration.
//! Four policies are provided: fixed constants, the FISTA-style recurrence
//! t_{k+1} = (1 + √(1 + 4 t_k²))/2 with α_k = β_k = (t_{k−1} − 1)/(2 t_k),
//! the ratio rule α_k = β_k = (k − 1)/(k + 2), and a multiplicative adaptive
//! policy that grows the pair after an accepted extrapolation and shrinks it
//! after a rejected one.
//!
//! Parameters are emitted before the step; the adaptive policy receives the
//! acceptance verdict afterwards through [`ExtrapolationSchedule::after_gate`].

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Constant,
    Fista,
    Ratio,
    Adaptive,
}

/// State machine producing (α_k, β_k) per iteration.
#[derive(Clone, Debug)]
pub struct ExtrapolationSchedule {
    variant: Variant,
    alpha: f64,
    beta: f64,
    alpha_max: f64,
    beta_max: f64,
    /// Adaptive multiplier t > 1.
    t_factor: f64,
    /// FISTA recurrence state t_{k−1}, t_k.
    t_prev: f64,
    t_cur: f64,
    k: u64,
    enforce_sum_bound: bool,
}

impl ExtrapolationSchedule {
    /// Fixed (α, β) for every iteration. Requires α, β ≥ 0 and α + β < 1.
    pub fn constant(alpha: f64, beta: f64) -> Result<Self> {
        if alpha < 0.0 || beta < 0.0 || alpha + beta >= 1.0 {
            return Err(Error::SumBoundViolation { alpha, beta });
        }
        Ok(Self {
            variant: Variant::Constant,
            alpha,
            beta,
            alpha_max: alpha,
            beta_max: beta,
            t_factor: 1.0,
            t_prev: 1.0,
            t_cur: 1.0,
            k: 0,
            enforce_sum_bound: true,
        })
    }

    /// FISTA-style recurrence with t_{−1} = t_0 = 1.
    pub fn fista() -> Self {
        Self {
            variant: Variant::Fista,
            alpha: 0.0,
            beta: 0.0,
            // (t_{k-1} - 1)/(2 t_k) stays below 1/2.
            alpha_max: 0.5,
            beta_max: 0.5,
            t_factor: 1.0,
            t_prev: 1.0,
            t_cur: 1.0,
            k: 0,
            enforce_sum_bound: false,
        }
    }

    /// Ratio rule α_k = β_k = max(0, (k − 1)/(k + 2)).
    ///
    /// The rule crosses α + β = 1 at k = 4, so it can only run with
    /// `enforce_sum_bound = false`; with the bound enforced, emission fails
    /// as soon as the pair leaves the admissible region.
    pub fn ratio(enforce_sum_bound: bool) -> Self {
        Self {
            variant: Variant::Ratio,
            alpha: 0.0,
            beta: 0.0,
            alpha_max: 1.0,
            beta_max: 1.0,
            t_factor: 1.0,
            t_prev: 1.0,
            t_cur: 1.0,
            k: 0,
            enforce_sum_bound,
        }
    }

    /// Adaptive multiplicative policy with caps and multiplier t > 1.
    pub fn adaptive(
        alpha0: f64,
        beta0: f64,
        alpha_max: f64,
        beta_max: f64,
        t_factor: f64,
    ) -> Result<Self> {
        if alpha_max + beta_max >= 1.0 || alpha_max < 0.0 || beta_max < 0.0 {
            return Err(Error::SumBoundViolation {
                alpha: alpha_max,
                beta: beta_max,
            });
        }
        if !(0.0..=alpha_max).contains(&alpha0) || !(0.0..=beta_max).contains(&beta0) {
            return Err(Error::InvalidConfig(format!(
                "initial pair ({alpha0}, {beta0}) outside [0, {alpha_max}] x [0, {beta_max}]"
            )));
        }
        if t_factor <= 1.0 {
            return Err(Error::InvalidConfig(format!(
                "adaptive multiplier must exceed 1, got {t_factor}"
            )));
        }
        Ok(Self {
            variant: Variant::Adaptive,
            alpha: alpha0,
            beta: beta0,
            alpha_max,
            beta_max,
            t_factor,
            t_prev: 1.0,
            t_cur: 1.0,
            k: 0,
            enforce_sum_bound: true,
        })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// FISTA recurrence state (t_{k−1}, t_k).
    pub fn fista_state(&self) -> (f64, f64) {
        (self.t_prev, self.t_cur)
    }

    /// Emit the pair for the coming iteration and advance the counter state.
    pub fn next(&mut self) -> Result<(f64, f64)> {
        match self.variant {
            Variant::Constant => Ok(self.next_constant()),
            Variant::Fista => Ok(self.next_fista()),
            Variant::Ratio => self.next_ratio(),
            Variant::Adaptive => {
                self.k += 1;
                Ok((self.alpha, self.beta))
            }
        }
    }

    /// Constant emission; the pair never changes.
    pub fn next_constant(&self) -> (f64, f64) {
        assert_eq!(self.variant, Variant::Constant, "wrong schedule variant");
        (self.alpha, self.beta)
    }

    /// FISTA emission: α_k = β_k = (t_{k−1} − 1)/(2 t_k), then advance.
    pub fn next_fista(&mut self) -> (f64, f64) {
        assert_eq!(self.variant, Variant::Fista, "wrong schedule variant");
        let value = (self.t_prev - 1.0) / (2.0 * self.t_cur);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * self.t_cur * self.t_cur).sqrt());
        self.t_prev = self.t_cur;
        self.t_cur = t_next;
        self.k += 1;
        self.alpha = value;
        self.beta = value;
        (value, value)
    }

    /// Ratio emission: α_k = β_k = max(0, (k − 1)/(k + 2)), then k += 1.
    pub fn next_ratio(&mut self) -> Result<(f64, f64)> {
        assert_eq!(self.variant, Variant::Ratio, "wrong schedule variant");
        let k = self.k as f64;
        let value = ((k - 1.0) / (k + 2.0)).max(0.0);
        if self.enforce_sum_bound && 2.0 * value >= 1.0 {
            return Err(Error::SumBoundViolation {
                alpha: value,
                beta: value,
            });
        }
        self.k += 1;
        self.alpha = value;
        self.beta = value;
        Ok((value, value))
    }

    /// Adaptive update after the monotone gate verdict: grow both parameters
    /// by t (capped) on acceptance, shrink by t on rejection.
    pub fn adaptive_update(&mut self, accepted: bool) {
        assert_eq!(self.variant, Variant::Adaptive, "wrong schedule variant");
        if accepted {
            self.alpha = (self.t_factor * self.alpha).min(self.alpha_max);
            self.beta = (self.t_factor * self.beta).min(self.beta_max);
        } else {
            self.alpha /= self.t_factor;
            self.beta /= self.t_factor;
        }
    }

    /// Feed the gate verdict back; a no-op for non-adaptive schedules.
    pub fn after_gate(&mut self, accepted: bool) {
        if self.variant == Variant::Adaptive {
            self.adaptive_update(accepted);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_presets() {
        let mut s = ExtrapolationSchedule::constant(0.3, 0.2).unwrap();
        assert_eq!(s.next().unwrap(), (0.3, 0.2));
        assert_eq!(s.next().unwrap(), (0.3, 0.2));
        // ASAP and aASAP are the degenerate pairs.
        assert_eq!(
            ExtrapolationSchedule::constant(0.0, 0.0)
                .unwrap()
                .next_constant(),
            (0.0, 0.0)
        );
        assert_eq!(
            ExtrapolationSchedule::constant(0.3, 0.0)
                .unwrap()
                .next_constant(),
            (0.3, 0.0)
        );
        assert!(ExtrapolationSchedule::constant(0.6, 0.4).is_err());
    }

    // Independent re-implementation of the recurrence for cross-checking.
    fn fista_reference(calls: usize) -> Vec<f64> {
        let mut out = Vec::new();
        let (mut t_prev, mut t_cur) = (1.0_f64, 1.0_f64);
        for _ in 0..calls {
            out.push((t_prev - 1.0) / (2.0 * t_cur));
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t_cur * t_cur).sqrt());
            t_prev = t_cur;
            t_cur = t_next;
        }
        out
    }

    #[test]
    fn fista_first_values() {
        let mut s = ExtrapolationSchedule::fista();
        let reference = fista_reference(3);
        assert_eq!(s.next_fista().0, 0.0);
        assert_eq!(s.next_fista().0, 0.0);
        let third = s.next_fista().0;
        assert_relative_eq!(third, reference[2], max_relative = 1e-15);
        assert_relative_eq!(third, 0.1409, max_relative = 1e-3);
    }

    #[test]
    fn fista_t_sequence_identity() {
        let mut s = ExtrapolationSchedule::fista();
        let mut prev_t = 1.0;
        for k in 0..200 {
            s.next_fista();
            let (t_prev, t_cur) = s.fista_state();
            // t_{k+1}^2 - t_{k+1} = t_k^2 exactly, and the sequence grows.
            assert_relative_eq!(
                t_cur * t_cur - t_cur,
                t_prev * t_prev,
                max_relative = 1e-12
            );
            if k > 0 {
                assert!(t_cur > prev_t);
            }
            assert!(t_prev >= 1.0);
            prev_t = t_cur;
        }
    }

    #[test]
    fn fista_pair_sum_stays_below_one() {
        let mut s = ExtrapolationSchedule::fista();
        for _ in 0..10_000 {
            let (a, b) = s.next_fista();
            assert!(a + b < 1.0);
        }
    }

    #[test]
    fn ratio_values() {
        let mut s = ExtrapolationSchedule::ratio(false);
        assert_eq!(s.next_ratio().unwrap(), (0.0, 0.0)); // k = 0
        assert_eq!(s.next_ratio().unwrap(), (0.0, 0.0)); // k = 1
        assert_relative_eq!(s.next_ratio().unwrap().0, 0.25); // k = 2
        assert_relative_eq!(s.next_ratio().unwrap().0, 0.4); // k = 3
        assert_relative_eq!(s.next_ratio().unwrap().0, 0.5); // k = 4
    }

    #[test]
    fn ratio_gate_rejects_at_k4() {
        let mut s = ExtrapolationSchedule::ratio(true);
        for _ in 0..4 {
            s.next_ratio().unwrap();
        }
        assert!(matches!(
            s.next_ratio(),
            Err(Error::SumBoundViolation { .. })
        ));
    }

    #[test]
    fn adaptive_examples() {
        let mut s = ExtrapolationSchedule::adaptive(0.3, 0.2, 0.5, 0.499, 1.2).unwrap();
        s.adaptive_update(true);
        assert_relative_eq!(s.alpha(), 0.36);
        assert_relative_eq!(s.beta(), 0.24);
        s.adaptive_update(false);
        assert_relative_eq!(s.alpha(), 0.3);
        assert_relative_eq!(s.beta(), 0.2);

        let mut capped = ExtrapolationSchedule::adaptive(0.48, 0.45, 0.5, 0.499, 1.2).unwrap();
        capped.adaptive_update(true);
        assert_relative_eq!(capped.alpha(), 0.5);
        assert_relative_eq!(capped.beta(), 0.499);
    }

    #[test]
    fn adaptive_caps_hold_under_random_verdicts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = ExtrapolationSchedule::adaptive(0.3, 0.2, 0.5, 0.499, 1.2).unwrap();
        for _ in 0..10_000 {
            let (a, b) = s.next().unwrap();
            assert!((0.0..=0.5).contains(&a));
            assert!((0.0..=0.499).contains(&b));
            s.after_gate(rng.random::<bool>());
        }
    }

    #[test]
    fn adaptive_updates_are_inverse_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            // stay far from the caps so no clipping occurs
            let a0 = 0.05 + 0.2 * rng.random::<f64>();
            let b0 = 0.05 + 0.2 * rng.random::<f64>();
            let mut s = ExtrapolationSchedule::adaptive(a0, b0, 0.5, 0.499, 1.2).unwrap();
            s.adaptive_update(true);
            s.adaptive_update(false);
            assert!((s.alpha() - a0).abs() <= 1e-15);
            assert!((s.beta() - b0).abs() <= 1e-15);
        }
    }

    #[test]
    fn adaptive_constructor_validation() {
        assert!(ExtrapolationSchedule::adaptive(0.3, 0.2, 0.5, 0.5, 1.2).is_err());
        assert!(ExtrapolationSchedule::adaptive(0.6, 0.2, 0.5, 0.499, 1.2).is_err());
        assert!(ExtrapolationSchedule::adaptive(0.3, 0.2, 0.5, 0.499, 1.0).is_err());
    }
}
