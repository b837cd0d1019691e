use asap_bench::config::{Experiment, ExperimentConfig};
use asap_bench::runner::{execute, grid_cells};
use std::time::Instant;

fn main() {
    for exp in [Experiment::Qp, Experiment::LogReg] {
        let mut base = ExperimentConfig::new(exp, std::env::temp_dir());
        base.max_iter = 20_000;
        println!("== {:?} (n={}, d={}, tol={})", exp, base.n, base.d, base.tol);
        for cell in grid_cells(&base) {
            let mut c = cell.clone();
            c.seed = 0;
            let t = Instant::now();
            match execute(&c) {
                Ok(trace) => println!(
                    "  {:22} iter={:6} extrap={:6} converged={} final_E={:.2e}  {:.2}s",
                    c.cell_label(),
                    trace.summary.iterations,
                    trace.summary.extrapolation_count,
                    trace.summary.converged,
                    trace.rows.last().map(|r| r.residual).unwrap_or(f64::NAN),
                    t.elapsed().as_secs_f64()
                ),
                Err(e) => println!("  {:22} ERROR: {e}", c.cell_label()),
            }
        }
    }
}
