//! Per-iteration run records and their CSV export.

use std::io::{self, Write};

use crate::solver::Iterate;

/// CSV header for trace export; one row per iteration.
pub const TRACE_CSV_HEADER: &str = "k,E,L,L_hat,accepted,alpha,beta,t_x,t_y,elapsed";

/// One iteration of a solver run.
#[derive(Clone, Debug)]
pub struct TraceRow {
    pub k: usize,
    /// Stopping residual E_k = ‖x_{k+1} − x_k‖ + ‖y_{k+1} − y_k‖.
    pub residual: f64,
    /// Objective at the plain iterate, L(z_{k+1}).
    pub objective: f64,
    /// Objective at the hat iterate selected by the gate, L(ẑ_{k+1}).
    pub objective_hat: f64,
    /// Whether the extrapolated point was taken.
    pub accepted: bool,
    pub alpha: f64,
    pub beta: f64,
    /// Scale applied to the x-block Bregman term (1 without backtracking).
    pub stepsize_x: f64,
    /// Scale applied to the y-block Bregman term.
    pub stepsize_y: f64,
    /// Monotonic wall time since the run started, sampled once per iteration.
    pub elapsed_seconds: f64,
}

/// End-of-run summary.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub iterations: usize,
    pub wall_time_seconds: f64,
    /// Number of iterations whose extrapolated point passed the gate.
    pub extrapolation_count: usize,
    /// Whether the residual dropped below the tolerance before the budget.
    pub converged: bool,
    pub final_point: Iterate,
}

/// Full iterate history, kept only when retention is enabled; consumed by the
/// descent certificates.
#[derive(Clone, Debug)]
pub struct RetainedIterates {
    /// Plain iterates z_0, z_1, …, z_K.
    pub plain: Vec<Iterate>,
    /// Hat iterates ẑ_0, …, ẑ_{K−1} as used by each iteration.
    pub hats: Vec<Iterate>,
}

/// Record of one solver run.
#[derive(Clone, Debug)]
pub struct RunTrace {
    /// L(z₀), anchoring the descent chain.
    pub initial_objective: f64,
    pub rows: Vec<TraceRow>,
    pub summary: RunSummary,
    pub retained: Option<RetainedIterates>,
}

impl RunTrace {
    /// Write the trace as CSV (`.` decimals, LF endings, header row).
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{TRACE_CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                r.k,
                r.residual,
                r.objective,
                r.objective_hat,
                r.accepted,
                r.alpha,
                r.beta,
                r.stepsize_x,
                r.stepsize_y,
                r.elapsed_seconds
            )?;
        }
        Ok(())
    }

    /// Objective at the plain iterate z_k (row k − 1, or the initial value).
    pub fn objective_at(&self, k: usize) -> f64 {
        if k == 0 {
            self.initial_objective
        } else {
            self.rows[k - 1].objective
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dummy_trace() -> RunTrace {
        RunTrace {
            initial_objective: 3.0,
            rows: vec![TraceRow {
                k: 0,
                residual: 0.5,
                objective: 2.0,
                objective_hat: 1.5,
                accepted: true,
                alpha: 0.3,
                beta: 0.2,
                stepsize_x: 1.0,
                stepsize_y: 1.0,
                elapsed_seconds: 0.001,
            }],
            summary: RunSummary {
                iterations: 1,
                wall_time_seconds: 0.001,
                extrapolation_count: 1,
                converged: false,
                final_point: Iterate {
                    x: vec![0.0],
                    y: vec![0.0],
                },
            },
            retained: None,
        }
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        dummy_trace().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), TRACE_CSV_HEADER);
        let row = lines.next().unwrap();
        assert!(row.starts_with("0,0.5,2,1.5,true,0.3,0.2,1,1,"));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn objective_indexing() {
        let t = dummy_trace();
        assert_eq!(t.objective_at(0), 3.0);
        assert_eq!(t.objective_at(1), 2.0);
    }
}
