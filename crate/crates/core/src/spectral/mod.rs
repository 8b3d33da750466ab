//! Quadrature-fluctuation spectrum and band-limited squeezing.
//!
//! The stationary quadrature correlation decays bi-exponentially with rates
//! `μ/2` and `κ/2`, so the spectrum about the carrier is a weighted
//! difference of two unit-area Lorentzians:
//!
//! ```text
//! S₋(ω′) = (Δb₋)² [κ L_μ(ω′) − μ L_κ(ω′)] / (κ − μ),   L_x = (x/2π) / (ω′² + x²/4)
//! ```
//!
//! Integrating over `|ω′| ≤ λ` scales every variance by the same `z(λ)`, so
//! band-limited squeezing equals the global value for any band.

pub mod quadrature;

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::analytic;
use crate::error::{Error, Result};
use crate::model::LaserParams;

/// Relative gap `|κ − μ| / κ` below which the confluent forms are used.
pub const CONFLUENT_TOL: f64 = 1e-9;

pub const SPECTRUM_CSV_HEADER: &str = "omega,s_minus";
pub const BAND_CSV_HEADER: &str = "lambda,z,var_minus_band,squeezing_band";

const MAX_INTERVALS: usize = 20_000;

fn confluent(kappa: f64, mu: f64) -> bool {
    (kappa - mu).abs() <= CONFLUENT_TOL * kappa
}

/// Unit-area spectral shape shared by both quadratures.
///
/// The Lorentzian difference is evaluated in its product form
/// `κμ(κ+μ) / (8π (ω′² + μ²/4)(ω′² + κ²/4))`, which is algebraically equal
/// but keeps full precision in the tails where the two terms nearly cancel.
pub fn spectral_kernel(kappa: f64, mu: f64, omega: f64) -> f64 {
    let w2 = omega * omega;
    let dk = w2 + 0.25 * kappa * kappa;
    if confluent(kappa, mu) {
        kappa.powi(3) / (4.0 * PI * dk * dk)
    } else {
        let dm = w2 + 0.25 * mu * mu;
        kappa * mu * (kappa + mu) / (8.0 * PI * dm * dk)
    }
}

/// Minus-quadrature spectral density at offset `omega` from the carrier.
pub fn s_minus(params: &LaserParams, omega: f64) -> f64 {
    let (_, var_minus) = analytic::quadrature_variances(params);
    var_minus * spectral_kernel(params.kappa(), params.mu(), omega)
}

/// Plus-quadrature spectral density, same kernel weighted by `(Δb₊)²`.
pub fn s_plus(params: &LaserParams, omega: f64) -> f64 {
    let (var_plus, _) = analytic::quadrature_variances(params);
    var_plus * spectral_kernel(params.kappa(), params.mu(), omega)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumCurve {
    pub omega: Vec<f64>,
    pub s_minus: Vec<f64>,
    pub params: crate::model::ParamsInput,
}

impl SpectrumCurve {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{SPECTRUM_CSV_HEADER}")?;
        for (w, s) in self.omega.iter().zip(&self.s_minus) {
            writeln!(out, "{}", crate::cli::format_row(&[*w, *s]))?;
        }
        Ok(())
    }
}

pub fn quadrature_spectrum(params: &LaserParams, omega_grid: &[f64]) -> Result<SpectrumCurve> {
    if omega_grid.iter().any(|w| !w.is_finite()) {
        return Err(Error::validation("omega_grid", "non-finite frequency"));
    }
    let (_, var_minus) = analytic::quadrature_variances(params);
    let (kappa, mu) = (params.kappa(), params.mu());
    Ok(SpectrumCurve {
        omega: omega_grid.to_vec(),
        s_minus: omega_grid
            .iter()
            .map(|&w| var_minus * spectral_kernel(kappa, mu, w))
            .collect(),
        params: params.input(),
    })
}

/// Symmetric grid of `points` offsets spanning `[-half_width, half_width]`.
pub fn symmetric_grid(half_width: f64, points: usize) -> Result<Vec<f64>> {
    if !(half_width > 0.0 && half_width.is_finite()) || points < 2 {
        return Err(Error::validation(
            "omega_grid",
            "need a positive half-width and at least 2 points",
        ));
    }
    let step = 2.0 * half_width / (points - 1) as f64;
    let mut grid = vec![0.0; points];
    // fill the outer pairs by mirroring so the grid is exactly symmetric
    for i in 0..points / 2 {
        let w = half_width - i as f64 * step;
        grid[i] = -w;
        grid[points - 1 - i] = w;
    }
    Ok(grid)
}

/// Fraction of the total quadrature variance inside `|ω′| ≤ λ`.
pub fn band_fraction(kappa: f64, mu: f64, lambda: f64) -> f64 {
    let two_over_pi = 2.0 / PI;
    if confluent(kappa, mu) {
        let x = 2.0 * lambda / kappa;
        two_over_pi * (x.atan() + x / (1.0 + x * x))
    } else {
        two_over_pi * (kappa * (2.0 * lambda / mu).atan() - mu * (2.0 * lambda / kappa).atan())
            / (kappa - mu)
    }
}

pub fn z_factor(params: &LaserParams, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(band_fraction(params.kappa(), params.mu(), lambda))
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 {
        Ok(())
    } else {
        Err(Error::validation(
            "lambda",
            format!("must be >= 0, got {lambda}"),
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandReport {
    pub lambda: f64,
    pub z: f64,
    pub var_minus_band: f64,
    pub var_coherent_band: f64,
    /// At `λ = 0` both band variances vanish; the constant global value is
    /// reported.
    pub squeezing_band: f64,
    pub squeezing_band_out: f64,
}

pub fn band_report(params: &LaserParams, lambda: f64) -> Result<BandReport> {
    let z = z_factor(params, lambda)?;
    let (_, var_minus) = analytic::quadrature_variances(params);
    let var_coherent = analytic::coherent_reference_variance(params);
    let (s, s_out) = analytic::quadrature_squeezing(params);
    let var_minus_band = z * var_minus;
    let var_coherent_band = z * var_coherent;
    let squeezing_band = if z > 0.0 {
        (var_coherent_band - var_minus_band) / var_coherent_band
    } else {
        s
    };
    Ok(BandReport {
        lambda,
        z,
        var_minus_band,
        var_coherent_band,
        squeezing_band,
        // the output variance carries the same z factor as the cavity one
        squeezing_band_out: if z > 0.0 { squeezing_band } else { s_out },
    })
}

pub fn write_band_csv<W: Write>(reports: &[BandReport], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{BAND_CSV_HEADER}")?;
    for r in reports {
        let row = [r.lambda, r.z, r.var_minus_band, r.squeezing_band];
        writeln!(out, "{}", crate::cli::format_row(&row))?;
    }
    Ok(())
}

/// Numerical band variance set against the closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandCheck {
    pub lambda: f64,
    pub quadrature: f64,
    pub closed_form: f64,
    pub difference: f64,
    pub estimated_error: f64,
    pub agrees: bool,
}

/// Integrates `S₋` over `[−λ, λ]` and compares with `z(λ)·(Δb₋)²`.
///
/// Agreement means `|difference| ≤ abs_tol + 1e-9·|closed_form|`.
pub fn verify_band_by_quadrature(
    params: &LaserParams,
    lambda: f64,
    abs_tol: f64,
) -> Result<BandCheck> {
    check_lambda(lambda)?;
    if !(abs_tol > 0.0) {
        return Err(Error::validation("abs_tol", "must be > 0"));
    }
    let (kappa, mu) = (params.kappa(), params.mu());
    let (_, var_minus) = analytic::quadrature_variances(params);
    // the integrand is even: integrate one side and double
    let half = quadrature::integrate(
        |w| var_minus * spectral_kernel(kappa, mu, w),
        0.0,
        lambda,
        0.25 * abs_tol,
        0.0,
        MAX_INTERVALS,
    )?;
    let quadrature = 2.0 * half.value;
    let closed_form = band_fraction(kappa, mu, lambda) * var_minus;
    let difference = quadrature - closed_form;
    Ok(BandCheck {
        lambda,
        quadrature,
        closed_form,
        difference,
        estimated_error: 2.0 * half.error,
        agrees: difference.abs() <= abs_tol + 1e-9 * closed_form.abs(),
    })
}

/// Total spectral weight from a finite window plus the far tails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Normalization {
    pub half_window: f64,
    pub window_integral: f64,
    /// Leading-order weight beyond the window,
    /// `2 (Δb₋)² κμ(κ+μ) / (24π L³)`.
    pub tail: f64,
    pub total: f64,
    pub variance: f64,
    pub relative_error: f64,
}

/// Integrates `S₋` over `[−L, L]` with `L = window_factor·κ`.
pub fn spectrum_normalization(
    params: &LaserParams,
    window_factor: f64,
    rel_tol: f64,
) -> Result<Normalization> {
    if !(window_factor > 0.0 && rel_tol > 0.0) {
        return Err(Error::validation(
            "window_factor",
            "window and tolerance must be > 0",
        ));
    }
    let (kappa, mu) = (params.kappa(), params.mu());
    let (_, var_minus) = analytic::quadrature_variances(params);
    let half_window = window_factor * kappa;
    let half = quadrature::integrate(
        |w| var_minus * spectral_kernel(kappa, mu, w),
        0.0,
        half_window,
        0.5 * rel_tol * var_minus,
        0.0,
        MAX_INTERVALS,
    )?;
    let window_integral = 2.0 * half.value;
    let tail = 2.0 * var_minus * kappa * mu * (kappa + mu) / (24.0 * PI * half_window.powi(3));
    let total = window_integral + tail;
    Ok(Normalization {
        half_window,
        window_integral,
        tail,
        total,
        variance: var_minus,
        relative_error: (total - var_minus).abs() / var_minus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use PI;

    /// κ = 2, μ = 1, η = 4.
    fn k2m1() -> LaserParams {
        LaserParams::from_rates(2.0, 2.0 / 3.0, 1.0 / 6.0, 100).unwrap()
    }

    fn lorentzian(width: f64, w: f64) -> f64 {
        (width / (2.0 * PI)) / (w * w + width * width / 4.0)
    }

    /// Weighted difference of the two unit-area Lorentzians.
    fn two_lorentzian(k: f64, m: f64, w: f64) -> f64 {
        (k * lorentzian(m, w) - m * lorentzian(k, w)) / (k - m)
    }

    #[test]
    fn fixture_rates() {
        let p = k2m1();
        assert!((p.kappa() - 2.0).abs() < 1e-15);
        assert!((p.mu() - 1.0).abs() < 1e-15);
        assert!((p.eta() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn kernel_matches_lorentzian_difference() {
        for (k, m) in [(2.0, 1.0), (16.0, 0.375), (1.0, 5.0)] {
            for w in [0.0, 0.3, 1.0, 7.5, 20.0] {
                let a = spectral_kernel(k, m, w);
                let b = two_lorentzian(k, m, w);
                assert!((a - b).abs() <= 1e-12 * b, "{k} {m} {w}: {a} {b}");
            }
        }
        // confluent branch against the limit of the difference form
        let (k, w) = (3.0, 0.7);
        let lim = spectral_kernel(k, k, w);
        assert!((lim - two_lorentzian(k, k * (1.0 - 1e-5), w)).abs() <= 1e-5 * lim);
    }

    #[test]
    fn peak_value() {
        let p = k2m1();
        let (_, vm) = analytic::quadrature_variances(&p);
        assert!((s_minus(&p, 0.0) - vm * 3.0 / PI).abs() < 1e-14 * vm);
    }

    #[test]
    fn curve_is_even() {
        let p = k2m1();
        let grid = symmetric_grid(20.0, 801).unwrap();
        let c = quadrature_spectrum(&p, &grid).unwrap();
        let n = grid.len();
        for i in 0..n {
            assert_eq!(grid[i], -grid[n - 1 - i]);
            assert!((c.s_minus[i] - c.s_minus[n - 1 - i]).abs() <= 1e-15);
        }
        assert_eq!(grid[400], 0.0);
    }

    #[test]
    fn z_reference_value() {
        // (2/π)[2 atan 2 − atan 1]
        let z = z_factor(&k2m1(), 1.0).unwrap();
        assert!((z - 0.909_665_529_398_266_8).abs() < 1e-15);
    }

    #[test]
    fn z_limits() {
        let p = k2m1();
        assert_eq!(z_factor(&p, 0.0).unwrap(), 0.0);
        assert!((z_factor(&p, 1e12).unwrap() - 1.0).abs() < 1e-11);
        assert!(z_factor(&p, -1.0).is_err());
    }

    #[test]
    fn confluent_branch_is_continuous() {
        let k = 3.0;
        for lam in [0.1 * k, k, 10.0 * k] {
            let lim = band_fraction(k, k, lam);
            let near = band_fraction(k, k * (1.0 - 1e-6), lam);
            assert!((lim - near).abs() <= 1e-5, "{lam}: {lim} {near}");
        }
        for w in [0.0, 0.5, 3.0, 30.0] {
            let lim = spectral_kernel(k, k, w);
            let near = spectral_kernel(k, k * (1.0 - 1e-6), w);
            assert!((lim - near).abs() <= 1e-5 * lim);
        }
    }

    #[test]
    fn quadrature_agrees_with_band_fraction() {
        let p = k2m1();
        let chk = verify_band_by_quadrature(&p, 1.0, 1e-10).unwrap();
        assert!(chk.agrees, "{chk:?}");
        let (_, vm) = analytic::quadrature_variances(&p);
        assert!((chk.quadrature / vm - 0.909_665_529_398_266_8).abs() < 1e-9);
        let zero = verify_band_by_quadrature(&p, 0.0, 1e-10).unwrap();
        assert_eq!(zero.quadrature, 0.0);
    }

    #[test]
    fn wide_band_recovers_global_variance() {
        let p = k2m1();
        let chk = verify_band_by_quadrature(&p, 1e4 * p.kappa(), 1e-9).unwrap();
        let (_, vm) = analytic::quadrature_variances(&p);
        assert!((chk.quadrature - vm).abs() <= 1e-4 * vm);
    }

    #[test]
    fn normalization_with_tail() {
        for p in [k2m1(), LaserParams::new(1.0, 16.0, 0.0625, 100).unwrap()] {
            let n = spectrum_normalization(&p, 1e4, 1e-9).unwrap();
            assert!(n.relative_error <= 1e-6, "{n:?}");
        }
    }

    #[test]
    fn band_squeezing_is_global() {
        let p = k2m1();
        let (s, s_out) = analytic::quadrature_squeezing(&p);
        for lam in [0.01, 0.1, 1.0, 10.0].map(|f| f * p.kappa()) {
            let r = band_report(&p, lam).unwrap();
            assert!((r.squeezing_band - s).abs() <= 1e-12);
            assert!((r.squeezing_band - 0.5).abs() <= 1e-12);
            assert_eq!(r.squeezing_band_out, r.squeezing_band);
        }
        let r0 = band_report(&p, 0.0).unwrap();
        assert_eq!(
            (r0.var_minus_band, r0.squeezing_band, r0.squeezing_band_out),
            (0.0, s, s_out)
        );
    }

    #[test]
    fn band_csv_layout() {
        let p = k2m1();
        let reports: Vec<_> = [0.5, 1.0]
            .iter()
            .map(|&l| band_report(&p, l).unwrap())
            .collect();
        let mut buf = Vec::new();
        write_band_csv(&reports, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), BAND_CSV_HEADER);
        assert_eq!(text.lines().count(), 3);
    }

    proptest! {
        #[test]
        fn spectrum_non_negative(k in 0.01f64..100.0, m in 0.01f64..100.0, w in -1e3f64..1e3) {
            prop_assert!(spectral_kernel(k, m, w) >= 0.0);
        }

        #[test]
        fn z_monotone_and_bounded(
            k in 0.01f64..100.0,
            m in 0.01f64..100.0,
            a in 0.0f64..1e3,
            b in 0.0f64..1e3,
        ) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let (zl, zh) = (band_fraction(k, m, lo), band_fraction(k, m, hi));
            prop_assert!(zl <= zh + 1e-15);
            prop_assert!((0.0..=1.0 + 1e-15).contains(&zl));
            prop_assert!((0.0..=1.0 + 1e-15).contains(&zh));
        }
    }
}
