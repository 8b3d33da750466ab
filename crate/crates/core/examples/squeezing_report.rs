//! Steady-state statistics at the squeezing optimum and around threshold.

use laserlab::{analytic, LaserParams};

fn main() -> laserlab::Result<()> {
    let base = LaserParams::new(1.0, 16.0, 0.0625, 100)?;
    for eta in [0.25, 1.0, 4.0, 16.0] {
        let p = base.with_eta(eta)?;
        let r = analytic::statistics_report(&p)?;
        println!("η = {eta:>5} ({:?})", r.regime);
        println!(
            "  populations  a {:.4}  b {:.4}  c {:.4}",
            r.populations.na, r.populations.nb, r.populations.nc
        );
        println!(
            "  n̄ {:.6}  (Δn)² {:.6}  (Δn)²/n̄² {:.4}",
            r.nbar,
            r.nvar,
            r.nvar / (r.nbar * r.nbar)
        );
        println!(
            "  (Δb₊)² {:.6}  (Δb₋)² {:.6}  coherent {:.6}",
            r.var_plus, r.var_minus, r.var_coherent
        );
        println!(
            "  squeezing S {:.6}  output {:.6}",
            r.squeezing, r.squeezing_out
        );
    }
    Ok(())
}
