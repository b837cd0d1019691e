//! Experiment configuration: presets, scales and schedule construction.

use std::path::PathBuf;

use anyhow::{bail, Result};
use asap_core::{ExtrapolationSchedule, Kind};

/// Ball radius of the QP family.
pub const QP_RADIUS: f64 = 2.0;

/// Adaptive multiplier per experiment.
pub const QP_T_FACTOR: f64 = 1.2;
pub const LOGREG_T_FACTOR: f64 = 1.5;

/// Adaptive caps: β_max = 0.499 with α_max = 0.5 keeps the sum below 1.
pub const ALPHA_MAX: f64 = 0.5;
pub const BETA_MAX: f64 = 0.499;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Qp,
    LogReg,
}

impl Experiment {
    pub fn label(self) -> &'static str {
        match self {
            Experiment::Qp => "qp",
            Experiment::LogReg => "logreg",
        }
    }
}

/// Algorithm presets: plain alternating descent, one-step inertia,
/// fixed two-step inertia, and the adaptive two-step variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Asap,
    AAsap,
    Alg1,
    Alg2,
}

/// Replaces the preset schedule; only meaningful on top of `Alg1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScheduleOverride {
    Fista,
    Ratio,
    Constants { alpha: f64, beta: f64 },
}

/// One benchmark cell: experiment, algorithm, kernel, sizes and seeds.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub algorithm: Algorithm,
    pub bregman_x: Kind,
    pub schedule_override: Option<ScheduleOverride>,
    /// Enable BB initialization of the backtracking stepsize.
    pub bb: bool,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
    /// Penalty override; the problem default applies when absent.
    pub mu: Option<f64>,
    /// Permit schedules that leave the α + β < 1 region (the ratio rule).
    pub unsafe_schedule: bool,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    /// Desk-scale defaults: QP n=100 at tol 1e-4, logistic n=200, d=50 at
    /// tol 1e-5, budget 10^5 iterations.
    pub fn new(experiment: Experiment, out_dir: PathBuf) -> Self {
        let (n, d, tol) = match experiment {
            Experiment::Qp => (100, 100, 1e-4),
            Experiment::LogReg => (200, 50, 1e-5),
        };
        Self {
            experiment,
            algorithm: Algorithm::Asap,
            bregman_x: Kind::SquaredEuclidean,
            schedule_override: None,
            bb: false,
            n,
            d,
            seed: 0,
            tol,
            max_iter: 100_000,
            mu: None,
            unsafe_schedule: false,
            out_dir,
        }
    }

    /// Switch to the full-size instances (QP n=500; logistic n=500, d=200).
    pub fn paper_scale(mut self) -> Self {
        match self.experiment {
            Experiment::Qp => {
                self.n = 500;
                self.d = 500;
            }
            Experiment::LogReg => {
                self.n = 500;
                self.d = 200;
            }
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            bail!("instance sizes must be positive");
        }
        if self.tol <= 0.0 {
            bail!("tolerance must be positive, got {}", self.tol);
        }
        if let Some(mu) = self.mu {
            if mu <= 0.0 {
                bail!("penalty must be positive, got {mu}");
            }
        }
        if self.schedule_override.is_some() && self.algorithm != Algorithm::Alg1 {
            bail!("schedule overrides only apply to alg1");
        }
        if matches!(self.schedule_override, Some(ScheduleOverride::Ratio)) && !self.unsafe_schedule
        {
            bail!(
                "the ratio schedule leaves the alpha + beta < 1 region at k = 4; \
                 pass --unsafe-schedule to run it"
            );
        }
        Ok(())
    }

    pub fn algorithm_label(&self) -> &'static str {
        match (self.algorithm, self.schedule_override) {
            (Algorithm::Alg1, Some(ScheduleOverride::Ratio)) => "alg1f",
            (Algorithm::Alg1, Some(ScheduleOverride::Fista)) => "alg1fista",
            (Algorithm::Asap, _) => "asap",
            (Algorithm::AAsap, _) => "aasap",
            (Algorithm::Alg1, _) => "alg1",
            (Algorithm::Alg2, _) => "alg2",
        }
    }

    pub fn bregman_label(&self) -> &'static str {
        match self.bregman_x {
            Kind::ItakuraSaito => "is",
            Kind::SquaredEuclidean => "euclid",
        }
    }

    pub fn cell_label(&self) -> String {
        format!(
            "{}_{}_{}",
            self.experiment.label(),
            self.algorithm_label(),
            self.bregman_label()
        )
    }

    pub fn t_factor(&self) -> f64 {
        match self.experiment {
            Experiment::Qp => QP_T_FACTOR,
            Experiment::LogReg => LOGREG_T_FACTOR,
        }
    }

    /// Build the extrapolation schedule for this cell.
    pub fn build_schedule(&self) -> Result<ExtrapolationSchedule> {
        if let Some(over) = self.schedule_override {
            return Ok(match over {
                ScheduleOverride::Fista => ExtrapolationSchedule::fista(),
                ScheduleOverride::Ratio => ExtrapolationSchedule::ratio(!self.unsafe_schedule),
                ScheduleOverride::Constants { alpha, beta } => {
                    ExtrapolationSchedule::constant(alpha, beta)?
                }
            });
        }
        Ok(match self.algorithm {
            Algorithm::Asap => ExtrapolationSchedule::constant(0.0, 0.0)?,
            Algorithm::AAsap => ExtrapolationSchedule::constant(0.3, 0.0)?,
            Algorithm::Alg1 => ExtrapolationSchedule::constant(0.3, 0.2)?,
            Algorithm::Alg2 => {
                ExtrapolationSchedule::adaptive(0.3, 0.2, ALPHA_MAX, BETA_MAX, self.t_factor())?
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use asap_core::schedules::Variant;

    fn base(experiment: Experiment) -> ExperimentConfig {
        ExperimentConfig::new(experiment, PathBuf::from("out"))
    }

    #[test]
    fn desk_defaults() {
        let qp = base(Experiment::Qp);
        assert_eq!((qp.n, qp.tol), (100, 1e-4));
        let lr = base(Experiment::LogReg);
        assert_eq!((lr.n, lr.d, lr.tol), (200, 50, 1e-5));
        assert_eq!(lr.max_iter, 100_000);
    }

    #[test]
    fn paper_scale_sizes() {
        let qp = base(Experiment::Qp).paper_scale();
        assert_eq!(qp.n, 500);
        let lr = base(Experiment::LogReg).paper_scale();
        assert_eq!((lr.n, lr.d), (500, 200));
    }

    #[test]
    fn preset_schedules() {
        let mut cfg = base(Experiment::Qp);
        for (alg, expect) in [
            (Algorithm::Asap, (0.0, 0.0)),
            (Algorithm::AAsap, (0.3, 0.0)),
            (Algorithm::Alg1, (0.3, 0.2)),
        ] {
            cfg.algorithm = alg;
            let mut s = cfg.build_schedule().unwrap();
            assert_eq!(s.next().unwrap(), expect);
        }
        cfg.algorithm = Algorithm::Alg2;
        let s = cfg.build_schedule().unwrap();
        assert_eq!(s.variant(), Variant::Adaptive);
        assert_eq!((s.alpha(), s.beta()), (0.3, 0.2));
    }

    #[test]
    fn ratio_needs_unsafe_flag() {
        let mut cfg = base(Experiment::Qp);
        cfg.algorithm = Algorithm::Alg1;
        cfg.schedule_override = Some(ScheduleOverride::Ratio);
        assert!(cfg.validate().is_err());
        cfg.unsafe_schedule = true;
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.algorithm_label(), "alg1f");
    }

    #[test]
    fn override_restricted_to_alg1() {
        let mut cfg = base(Experiment::Qp);
        cfg.algorithm = Algorithm::Alg2;
        cfg.schedule_override = Some(ScheduleOverride::Fista);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn cell_labels() {
        let mut cfg = base(Experiment::LogReg);
        cfg.algorithm = Algorithm::Alg2;
        cfg.bregman_x = Kind::ItakuraSaito;
        assert_eq!(cfg.cell_label(), "logreg_alg2_is");
    }
}
