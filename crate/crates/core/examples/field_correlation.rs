//! Two-time field correlation against the bi-exponential regression law.

use laserlab::stochastic::{two_time_correlation, CorrelationConfig, LangevinConfig};
use laserlab::LaserParams;

fn main() -> laserlab::Result<()> {
    let p = LaserParams::new(1.0, 16.0, 0.0625, 100)?;
    let span = 4.0 / p.mu();
    let cfg = CorrelationConfig {
        n_traj: 3000,
        t_anchor: CorrelationConfig::min_anchor(&p),
        tau_grid: (0..=8).map(|k| span * k as f64 / 8.0).collect(),
        dt: LangevinConfig::max_dt(&p),
        seed: 1,
    };
    let rep = two_time_correlation(&p, &cfg)?;
    println!(
        "stationary <b†b> {:.5} (slaved n̄ {:.5})",
        rep.bdb_stationary, rep.nbar
    );
    println!(
        "{:>8} {:>10} {:>9} {:>10} {:>7}",
        "tau", "estimate", "se", "model", "z"
    );
    for pt in &rep.points {
        println!(
            "{:>8.3} {:>10.5} {:>9.5} {:>10.5} {:>+7.2}",
            pt.tau, pt.estimate.mean, pt.estimate.std_error, pt.model, pt.deviation_sigma
        );
    }
    Ok(())
}
