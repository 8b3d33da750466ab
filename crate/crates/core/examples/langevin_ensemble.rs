//! Langevin ensemble for the collective coherences and the moment-law check.
//!
//! Also contrasts the reconstructed noise cross-correlation with independent
//! noise sources, which undershoot ⟨m†m⟩ by `r_a N² / (2μ)`.

use laserlab::stochastic::{
    drift_regression, langevin_ensemble, DriftConfig, LangevinConfig, NoiseModel,
};
use laserlab::LaserParams;

fn main() -> laserlab::Result<()> {
    let p = LaserParams::new(1.0, 16.0, 0.0625, 100)?;
    let dt = LangevinConfig::max_dt(&p);
    let cfg = LangevinConfig::new(&p, 4000, 40.0 / p.mu(), dt, 1);
    let est = langevin_ensemble(&p, &cfg)?;
    for rec in est.records(&p) {
        println!(
            "{:<12} {:>12.5} ± {:<10.5} reference {:.5}",
            rec.estimator,
            rec.mean,
            rec.std_error,
            rec.reference.unwrap_or(f64::NAN)
        );
    }

    let drift = DriftConfig {
        n_traj: 4000,
        dt,
        seed: 2,
        t_end: 3.0 / p.mu(),
        n_intervals: 6,
    };
    for (label, noise) in [
        ("reconstructed", NoiseModel::reconstructed(&p)),
        ("independent", NoiseModel::independent(&p)),
    ] {
        let reg = drift_regression(&p, &noise, &drift)?;
        println!(
            "{label:<14} slope {:.3}  max |z| {:.2}  consistent: {}",
            reg.slope,
            reg.max_abs_z,
            reg.consistent(3.5)
        );
    }
    Ok(())
}
