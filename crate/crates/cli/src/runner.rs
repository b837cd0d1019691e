//! Experiment execution and CSV emission.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use asap_core::{gen_logreg, gen_qp, run, Backtracking, Iterate, RunTrace, SolverConfig};
use rayon::prelude::*;

use crate::config::{Algorithm, Experiment, ExperimentConfig, ScheduleOverride, QP_RADIUS};

pub const SUMMARY_CSV_HEADER: &str = "algorithm,bregman,iter,time_s,extrapolation,converged";
pub const TABLE_CSV_HEADER: &str = "algorithm,bregman,iter_median,iter_iqr,time_median,time_iqr,\
extrapolation_median,extrapolation_iqr,converged,seeds,status";

/// One summary line, as appended to `summary.csv`.
#[derive(Clone, Debug)]
pub struct SummaryRow {
    pub algorithm: String,
    pub bregman: String,
    pub iterations: usize,
    pub time_seconds: f64,
    pub extrapolation: usize,
    pub converged: bool,
}

impl SummaryRow {
    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.algorithm,
            self.bregman,
            self.iterations,
            self.time_seconds,
            self.extrapolation,
            self.converged
        )
    }
}

/// Outcome of a single-cell invocation.
#[derive(Debug)]
pub struct RunOutput {
    pub summary: SummaryRow,
    pub trace_path: PathBuf,
}

/// One `table.csv` line: median and IQR over the seed set for one cell.
#[derive(Clone, Debug)]
pub struct TableRow {
    pub algorithm: String,
    pub bregman: String,
    pub iter_median: f64,
    pub iter_iqr: f64,
    pub time_median: f64,
    pub time_iqr: f64,
    pub extrapolation_median: f64,
    pub extrapolation_iqr: f64,
    pub converged: usize,
    pub seeds: usize,
    pub status: String,
}

impl TableRow {
    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.algorithm,
            self.bregman,
            self.iter_median,
            self.iter_iqr,
            self.time_median,
            self.time_iqr,
            self.extrapolation_median,
            self.extrapolation_iqr,
            self.converged,
            self.seeds,
            self.status
        )
    }
}

/// Run one cell in memory: build the instance, generators, schedule and
/// starting point from the seeds, then drive the solver.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunTrace> {
    cfg.validate()?;
    let schedule = cfg.build_schedule()?;
    match cfg.experiment {
        Experiment::Qp => {
            let mut instance = gen_qp(cfg.n, QP_RADIUS, cfg.seed);
            if let Some(mu) = cfg.mu {
                instance = instance.with_mu(mu)?;
            }
            let mut solver_cfg = SolverConfig::new(
                instance.default_generator_x(cfg.bregman_x),
                instance.default_generator_y(),
                schedule,
                cfg.tol,
                cfg.max_iter,
            )?;
            if cfg.bb {
                solver_cfg = solver_cfg.with_backtracking(Backtracking::default())?;
                solver_cfg.bb_init = true;
            }
            let (x0, y0) = instance.sample_start(cfg.bregman_x, cfg.seed);
            Ok(run(&instance, &Iterate::new(x0, y0), solver_cfg)?)
        }
        Experiment::LogReg => {
            let mut instance = gen_logreg(cfg.n, cfg.d, cfg.seed);
            if let Some(mu) = cfg.mu {
                instance = instance.with_mu(mu)?;
            }
            // the logistic curvature is treated as unknown: always backtrack;
            // --bb switches the per-iteration initialization to the BB rule
            let solver_cfg = SolverConfig::new(
                instance.default_generator_x(cfg.bregman_x),
                instance.default_generator_y(),
                schedule,
                cfg.tol,
                cfg.max_iter,
            )?
            .with_backtracking(Backtracking::default())?
            .with_bb_init(cfg.bb);
            let (x0, y0) = instance.sample_start(cfg.bregman_x, cfg.seed);
            Ok(run(&instance, &Iterate::new(x0, y0), solver_cfg)?)
        }
    }
}

fn summarize(cfg: &ExperimentConfig, trace: &RunTrace) -> SummaryRow {
    SummaryRow {
        algorithm: cfg.algorithm_label().to_string(),
        bregman: cfg.bregman_label().to_string(),
        iterations: trace.summary.iterations,
        time_seconds: trace.summary.wall_time_seconds,
        extrapolation: trace.summary.extrapolation_count,
        converged: trace.summary.converged,
    }
}

fn write_trace(cfg: &ExperimentConfig, trace: &RunTrace) -> Result<PathBuf> {
    fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("creating {}", cfg.out_dir.display()))?;
    let path = cfg
        .out_dir
        .join(format!("trace_{}_{}.csv", cfg.cell_label(), cfg.seed));
    let file = fs::File::create(&path).with_context(|| format!("writing {}", path.display()))?;
    trace.write_csv(file)?;
    Ok(path)
}

/// Run one cell, write its trace file and append the summary row.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let trace = execute(cfg)?;
    let trace_path = write_trace(cfg, &trace)?;
    let summary = summarize(cfg, &trace);

    let summary_path = cfg.out_dir.join("summary.csv");
    let fresh = !summary_path.exists();
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&summary_path)
        .with_context(|| format!("opening {}", summary_path.display()))?;
    if fresh {
        writeln!(file, "{SUMMARY_CSV_HEADER}")?;
    }
    writeln!(file, "{}", summary.csv_line())?;

    Ok(RunOutput {
        summary,
        trace_path,
    })
}

/// The benchmark grid: {asap, aasap, alg1, alg1f, alg2} × {is, euclid}.
pub fn grid_cells(base: &ExperimentConfig) -> Vec<ExperimentConfig> {
    let presets: [(Algorithm, Option<ScheduleOverride>); 5] = [
        (Algorithm::Asap, None),
        (Algorithm::AAsap, None),
        (Algorithm::Alg1, None),
        (Algorithm::Alg1, Some(ScheduleOverride::Ratio)),
        (Algorithm::Alg2, None),
    ];
    let mut cells = Vec::new();
    for kind in [
        asap_core::Kind::ItakuraSaito,
        asap_core::Kind::SquaredEuclidean,
    ] {
        for (algorithm, schedule_override) in presets {
            let mut cfg = base.clone();
            cfg.algorithm = algorithm;
            cfg.schedule_override = schedule_override;
            cfg.bregman_x = kind;
            // the ratio cells are part of the published protocol; the grid
            // runs them with the sum bound lifted
            if matches!(schedule_override, Some(ScheduleOverride::Ratio)) {
                cfg.unsafe_schedule = true;
            }
            cells.push(cfg);
        }
    }
    cells
}

/// Run every grid cell over every seed (cells × seeds in parallel), write
/// `table.csv` plus one residual trace per cell (first seed), and return the
/// table rows. Failing cells are marked in the status column instead of
/// aborting the grid.
pub fn run_grid(base: &ExperimentConfig, seeds: &[u64]) -> Result<Vec<TableRow>> {
    anyhow::ensure!(!seeds.is_empty(), "the grid needs at least one seed");
    let cells = grid_cells(base);

    let mut tasks = Vec::new();
    for (ci, cell) in cells.iter().enumerate() {
        for &seed in seeds {
            let mut cfg = cell.clone();
            cfg.seed = seed;
            tasks.push((ci, seed, cfg));
        }
    }

    let results: Vec<(usize, u64, Result<RunTrace>)> = tasks
        .into_par_iter()
        .map(|(ci, seed, cfg)| {
            let outcome = execute(&cfg);
            (ci, seed, outcome)
        })
        .collect();

    fs::create_dir_all(&base.out_dir)
        .with_context(|| format!("creating {}", base.out_dir.display()))?;
    let mut rows = Vec::new();
    for (ci, cell) in cells.iter().enumerate() {
        let mut iters = Vec::new();
        let mut times = Vec::new();
        let mut extraps = Vec::new();
        let mut converged = 0usize;
        let mut status = String::from("ok");
        for (rci, seed, outcome) in &results {
            if *rci != ci {
                continue;
            }
            match outcome {
                Ok(trace) => {
                    iters.push(trace.summary.iterations as f64);
                    times.push(trace.summary.wall_time_seconds);
                    extraps.push(trace.summary.extrapolation_count as f64);
                    if trace.summary.converged {
                        converged += 1;
                    }
                    if *seed == seeds[0] {
                        let mut cfg = cell.clone();
                        cfg.seed = *seed;
                        write_trace(&cfg, trace)?;
                    }
                }
                Err(e) => {
                    if status == "ok" {
                        status = format!("failed: {e}");
                    }
                }
            }
        }
        rows.push(TableRow {
            algorithm: cell.algorithm_label().to_string(),
            bregman: cell.bregman_label().to_string(),
            iter_median: median(&mut iters),
            iter_iqr: iqr(&mut iters),
            time_median: median(&mut times),
            time_iqr: iqr(&mut times),
            extrapolation_median: median(&mut extraps),
            extrapolation_iqr: iqr(&mut extraps),
            converged,
            seeds: seeds.len(),
            status,
        });
    }

    let table_path = base.out_dir.join("table.csv");
    let mut file =
        fs::File::create(&table_path).with_context(|| format!("writing {}", table_path.display()))?;
    writeln!(file, "{TABLE_CSV_HEADER}")?;
    for row in &rows {
        writeln!(file, "{}", row.csv_line())?;
    }

    Ok(rows)
}

/// Median of the values (NaN when empty).
pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Interquartile range with median-exclusive quartiles: q1 and q3 are the
/// medians of the lower and upper halves, middle element excluded for odd
/// counts.
pub fn iqr(values: &mut [f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return if n == 1 { 0.0 } else { f64::NAN };
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let half = n / 2;
    let q1 = median(&mut values[..half].to_vec());
    let q3 = median(&mut values[n - half..].to_vec());
    q3 - q1
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    #[test]
    fn median_and_iqr() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 3.0, 2.0]), 2.5);
        assert!(median(&mut []).is_nan());
        assert_eq!(iqr(&mut [1.0, 2.0, 3.0, 4.0]), 2.0);
        assert_eq!(iqr(&mut [1.0, 2.0, 3.0, 4.0, 5.0]), 3.0);
        assert_eq!(iqr(&mut [7.0]), 0.0);
    }

    #[test]
    fn grid_has_ten_cells() {
        let base = ExperimentConfig::new(Experiment::Qp, PathBuf::from("out"));
        let cells = grid_cells(&base);
        assert_eq!(cells.len(), 10);
        let labels: Vec<String> = cells.iter().map(|c| c.cell_label()).collect();
        assert!(labels.contains(&"qp_alg1f_is".to_string()));
        assert!(labels.contains(&"qp_alg2_euclid".to_string()));
        // no duplicates
        let mut sorted = labels.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 10);
    }

    #[test]
    fn execute_small_qp_converges() {
        let mut cfg = ExperimentConfig::new(Experiment::Qp, PathBuf::from("unused"));
        cfg.n = 20;
        cfg.algorithm = Algorithm::Alg2;
        let trace = execute(&cfg).unwrap();
        assert!(trace.summary.converged);
        assert!(trace.summary.extrapolation_count <= trace.summary.iterations);
    }

    #[test]
    fn execute_small_logreg_converges_both_kernels() {
        for kind in [
            asap_core::Kind::SquaredEuclidean,
            asap_core::Kind::ItakuraSaito,
        ] {
            let mut cfg = ExperimentConfig::new(Experiment::LogReg, PathBuf::from("unused"));
            cfg.n = 60;
            cfg.d = 12;
            cfg.bregman_x = kind;
            cfg.algorithm = Algorithm::Alg1;
            let trace = execute(&cfg).unwrap();
            assert!(trace.summary.converged, "kernel {kind:?}");
        }
    }

    #[test]
    fn execute_is_deterministic_modulo_time() {
        let mut cfg = ExperimentConfig::new(Experiment::Qp, PathBuf::from("unused"));
        cfg.n = 25;
        cfg.algorithm = Algorithm::Alg2;
        cfg.seed = 9;
        let a = execute(&cfg).unwrap();
        let b = execute(&cfg).unwrap();
        assert_eq!(a.summary.iterations, b.summary.iterations);
        assert_eq!(a.summary.extrapolation_count, b.summary.extrapolation_count);
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert_eq!(ra.residual.to_bits(), rb.residual.to_bits());
            assert_eq!(ra.objective.to_bits(), rb.objective.to_bits());
            assert_eq!(ra.accepted, rb.accepted);
        }
    }
}
