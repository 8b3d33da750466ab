//! Quadrature spectrum, band fraction and band-limited squeezing.

use laserlab::spectral::{self, band_report, verify_band_by_quadrature};
use laserlab::{analytic, LaserParams};

fn main() -> laserlab::Result<()> {
    // κ = 2, μ = 1, η = 4
    let p = LaserParams::from_rates(2.0, 2.0 / 3.0, 1.0 / 6.0, 100)?;
    let (_, var_minus) = analytic::quadrature_variances(&p);
    println!(
        "(Δb₋)² = {var_minus:.6}, S₋(0) = {:.6}",
        spectral::s_minus(&p, 0.0)
    );

    println!(
        "{:>8} {:>10} {:>14} {:>10} {:>12}",
        "lambda", "z", "var_minus", "S_band", "quad err"
    );
    for lambda in [0.02, 0.2, 1.0, 2.0, 20.0] {
        let r = band_report(&p, lambda)?;
        let chk = verify_band_by_quadrature(&p, lambda, 1e-12)?;
        println!(
            "{:>8.2} {:>10.6} {:>14.8} {:>10.6} {:>12.1e}",
            r.lambda, r.z, r.var_minus_band, r.squeezing_band, chk.difference
        );
    }

    let norm = spectral::spectrum_normalization(&p, 1e4, 1e-9)?;
    println!(
        "∫S₋ over ±{:.0}: {:.12} + tail {:.1e} = {:.12} (relative error {:.1e})",
        norm.half_window, norm.window_integral, norm.tail, norm.total, norm.relative_error
    );
    Ok(())
}
