//! Squeezing against η on a log grid, written as CSV to stdout.
//!
//! ```text
//! cargo run --example eta_sweep > sweep.csv
//! ```

use laserlab::cli::{format_row, log_grid, sweep_rows, SWEEP_CSV_HEADER};
use laserlab::LaserParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = LaserParams::new(1.0, 16.0, 0.0625, 100)?;
    let grid = log_grid(0.01, 100.0, 401)?;
    let rows = sweep_rows(&params, &grid)?;
    println!("{SWEEP_CSV_HEADER}");
    for r in &rows {
        println!(
            "{}",
            format_row(&[r.eta, r.squeezing, r.nbar_over_n, r.nvar_ratio])
        );
    }
    let best = rows
        .iter()
        .max_by(|a, b| a.squeezing.total_cmp(&b.squeezing))
        .expect("grid is non-empty");
    eprintln!("peak S = {:.6} at η = {:.4}", best.squeezing, best.eta);
    Ok(())
}
