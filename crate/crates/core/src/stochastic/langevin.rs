//! Langevin ensembles for the collective coherences.
//!
//! Each trajectory integrates, with Euler–Maruyama,
//!
//! ```text
//! dm_a = −(μ/2) m_a dt + dW_a
//! dm   = −(μ/2) m dt + (μ/2) m_a dt + dW_m
//! ```
//!
//! with complex Gaussian increments `⟨dW_a* dW_a⟩ = d_aa dt`,
//! `⟨dW_m* dW_m⟩ = d_mm dt`, `⟨dW_a* dW_m⟩ = d_am dt`. The field is read off
//! its steady-state slaving `b = (2g / κ√N) m` at the sampling time.
//!
//! Stationarity of this pair gives
//! `⟨m†m⟩ = (d_mm + d_aa/2 + d_am)/μ`, so `d_aa = d_mm = r_a N²` together
//! with `d_am = r_a N² / 2` is the unique real cross strength for which the
//! moment law `d⟨m†m⟩/dt = −μ⟨m†m⟩ + μ⟨m_a†m_a⟩ + r_a N²` holds and
//! `⟨m†m⟩ → 2 r_a N² / μ`. Independent noises land `r_a N² / (2μ)` low.

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{stream_rng, EnsembleEstimate, EstimateRecord, RunInfo};
use crate::analytic;
use crate::error::{Error, Result};
use crate::model::LaserParams;

/// Largest step allowed, as a fraction of `min(2/μ, 2/κ)`.
pub const DT_CAP_FRACTION: f64 = 0.05;

/// Noise strengths driving `(m_a, m)`.
///
/// `d_*` are the normally ordered correlators `⟨F†(t) F(t')⟩ / δ(t − t')`.
/// The phase-sensitive strengths `e_*` (correlators `⟨F(t) F(t')⟩`) are zero
/// unless `phase_sensitive` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    pub d_aa: f64,
    pub d_mm: f64,
    pub d_am: f64,
    #[serde(default)]
    pub phase_sensitive: bool,
    #[serde(default)]
    pub e_aa: f64,
    #[serde(default)]
    pub e_mm: f64,
    #[serde(default)]
    pub e_am: f64,
}

impl NoiseModel {
    /// `d_aa = d_mm = r_a N²`, `d_am = r_a N² / 2`.
    pub fn reconstructed(params: &LaserParams) -> Self {
        let d = source_strength(params);
        Self::phase_insensitive(d, d, 0.5 * d)
    }

    /// Same auto-correlators, uncorrelated `F_a`, `F_m`.
    pub fn independent(params: &LaserParams) -> Self {
        let d = source_strength(params);
        Self::phase_insensitive(d, d, 0.0)
    }

    pub fn zero() -> Self {
        Self::phase_insensitive(0.0, 0.0, 0.0)
    }

    pub fn phase_insensitive(d_aa: f64, d_mm: f64, d_am: f64) -> Self {
        Self {
            d_aa,
            d_mm,
            d_am,
            phase_sensitive: false,
            e_aa: 0.0,
            e_mm: 0.0,
            e_am: 0.0,
        }
    }

    /// Adds `⟨FF⟩` correlators with the same shape as the `⟨F†F⟩` ones,
    /// scaled so the stationary `⟨m²⟩` equals `N ⟨m̂_c⟩`.
    ///
    /// A classical complex Gaussian needs `|e| ≤ d`, which holds only for
    /// `η ≤ 4`; larger `η` is rejected when the ensemble is built.
    pub fn with_phase_sensitivity(params: &LaserParams) -> Self {
        let base = Self::reconstructed(params);
        // stationary ⟨m²⟩ = 2e/μ for e_aa = e_mm = e, e_am = e/2
        let e = 0.5 * params.mu() * params.n() * analytic::coherence_mc(params);
        Self {
            phase_sensitive: true,
            e_aa: e,
            e_mm: e,
            e_am: 0.5 * e,
            ..base
        }
    }

    /// Stationary `⟨m†m⟩` of the pair driven by this noise.
    pub fn stationary_mdm(&self, mu: f64) -> f64 {
        (self.d_mm + 0.5 * self.d_aa + self.d_am) / mu
    }

    fn sampler(&self) -> Result<NoiseSampler> {
        let (e_aa, e_mm, e_am) = if self.phase_sensitive {
            (self.e_aa, self.e_mm, self.e_am)
        } else {
            (0.0, 0.0, 0.0)
        };
        // X = Re dW, Y = Im dW are independent with covariances (C ± P)/2.
        let re = cholesky2(
            0.5 * (self.d_aa + e_aa),
            0.5 * (self.d_am + e_am),
            0.5 * (self.d_mm + e_mm),
        )?;
        let im = cholesky2(
            0.5 * (self.d_aa - e_aa),
            0.5 * (self.d_am - e_am),
            0.5 * (self.d_mm - e_mm),
        )?;
        Ok(NoiseSampler { re, im })
    }
}

/// `r_a N²`.
pub fn source_strength(params: &LaserParams) -> f64 {
    params.pump_rate() * params.n() * params.n()
}

/// Lower-triangular factor of `[[a, c], [c, b]]`, tolerating semidefinite
/// input.
fn cholesky2(a: f64, c: f64, b: f64) -> Result<Matrix2<f64>> {
    let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    let tol = 1e-12 * scale;
    if a < -tol || b < -tol || a * b - c * c < -tol * scale {
        return Err(Error::validation(
            "noise",
            format!("correlator matrix [[{a}, {c}], [{c}, {b}]] is not positive semidefinite"),
        ));
    }
    let l11 = a.max(0.0).sqrt();
    let l21 = if l11 > 0.0 { c / l11 } else { 0.0 };
    let l22 = (b - l21 * l21).max(0.0).sqrt();
    Ok(Matrix2::new(l11, 0.0, l21, l22))
}

#[derive(Debug, Clone, Copy)]
struct NoiseSampler {
    re: Matrix2<f64>,
    im: Matrix2<f64>,
}

impl NoiseSampler {
    /// `(dW_a, dW_m)` over a step of length `dt`.
    fn draw(&self, rng: &mut ChaCha8Rng, sqrt_dt: f64) -> (Complex64, Complex64) {
        let z: [f64; 4] = std::array::from_fn(|_| rng.sample::<f64, _>(StandardNormal));
        let (r, i) = (&self.re, &self.im);
        let xa = r[(0, 0)] * z[0];
        let xm = r[(1, 0)] * z[0] + r[(1, 1)] * z[1];
        let ya = i[(0, 0)] * z[2];
        let ym = i[(1, 0)] * z[2] + i[(1, 1)] * z[3];
        (
            Complex64::new(xa, ya) * sqrt_dt,
            Complex64::new(xm, ym) * sqrt_dt,
        )
    }
}

fn check_step(params: &LaserParams, dt: f64) -> Result<()> {
    let cap = DT_CAP_FRACTION * (2.0 / params.mu()).min(2.0 / params.kappa());
    if !(dt > 0.0 && dt <= cap * (1.0 + 1e-12)) {
        return Err(Error::validation(
            "dt",
            format!("must satisfy 0 < dt <= {cap:e} (0.05·min(2/μ, 2/κ)), got {dt}"),
        ));
    }
    Ok(())
}

pub(crate) fn steps_for(t_end: f64, dt: f64) -> Result<u64> {
    if !(t_end.is_finite() && t_end >= dt) {
        return Err(Error::validation(
            "t_end",
            format!("must be >= dt, got {t_end}"),
        ));
    }
    Ok((t_end / dt - 1e-9).ceil() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LangevinConfig {
    pub n_traj: usize,
    pub t_end: f64,
    pub dt: f64,
    pub seed: u64,
    pub noise: NoiseModel,
}

impl LangevinConfig {
    pub fn new(params: &LaserParams, n_traj: usize, t_end: f64, dt: f64, seed: u64) -> Self {
        Self {
            n_traj,
            t_end,
            dt,
            seed,
            noise: NoiseModel::reconstructed(params),
        }
    }

    /// Largest step the ensemble accepts for these parameters.
    pub fn max_dt(params: &LaserParams) -> f64 {
        DT_CAP_FRACTION * (2.0 / params.mu()).min(2.0 / params.kappa())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LangevinEstimates {
    pub mdm: EnsembleEstimate,
    pub madma: EnsembleEstimate,
    /// `⟨b†b⟩` with `b` slaved to `m`.
    pub bdb: EnsembleEstimate,
    /// `⟨b b†⟩` through the contraction `(γ_c/κ)(N − ⟨m_a†m_a⟩/N)`.
    pub bbdag_proxy: EnsembleEstimate,
    /// `⟨b²⟩`; non-zero only with phase-sensitive noise.
    pub b2: EnsembleEstimate<Complex64>,
    pub m_mean: EnsembleEstimate<Complex64>,
    pub ma_mean: EnsembleEstimate<Complex64>,
    pub steps: u64,
    pub run: RunInfo,
}

impl LangevinEstimates {
    /// Flat records with closed-form references for export.
    pub fn records(&self, params: &LaserParams) -> Vec<EstimateRecord> {
        let d = source_strength(params);
        let mu = params.mu();
        vec![
            EstimateRecord::new("mdm", &self.mdm, Some(2.0 * d / mu)),
            EstimateRecord::new("madma", &self.madma, Some(d / mu)),
            EstimateRecord::new("bdb", &self.bdb, Some(analytic::mean_photon_number(params))),
            EstimateRecord::new(
                "bbdag_proxy",
                &self.bbdag_proxy,
                Some(analytic::antinormal_moment(params)),
            ),
        ]
    }
}

struct PathEnd {
    ma: Complex64,
    m: Complex64,
}

fn run_path(
    sampler: &NoiseSampler,
    half_mu: f64,
    dt: f64,
    steps: u64,
    mut rng: ChaCha8Rng,
    mut ma: Complex64,
    mut m: Complex64,
) -> Result<PathEnd> {
    let sqrt_dt = dt.sqrt();
    for step in 1..=steps {
        let (dwa, dwm) = sampler.draw(&mut rng, sqrt_dt);
        let next_ma = ma - ma * (half_mu * dt) + dwa;
        m = m + (ma - m) * (half_mu * dt) + dwm;
        ma = next_ma;
        if step % 1024 == 0 && !(m.is_finite() && ma.is_finite()) {
            return Err(Error::Divergence {
                time: step as f64 * dt,
            });
        }
    }
    if !(m.is_finite() && ma.is_finite()) {
        return Err(Error::Divergence {
            time: steps as f64 * dt,
        });
    }
    Ok(PathEnd { ma, m })
}

/// Runs `n_traj` trajectories from zero coherence up to `t_end` and
/// estimates the steady-state moments at `t_end`.
pub fn langevin_ensemble(params: &LaserParams, cfg: &LangevinConfig) -> Result<LangevinEstimates> {
    check_step(params, cfg.dt)?;
    if cfg.n_traj < 2 {
        return Err(Error::validation("n_traj", "need at least 2 trajectories"));
    }
    let steps = steps_for(cfg.t_end, cfg.dt)?;
    let sampler = cfg.noise.sampler()?;
    let half_mu = 0.5 * params.mu();
    let zero = Complex64::new(0.0, 0.0);

    let ends: Vec<PathEnd> = (0..cfg.n_traj as u64)
        .into_par_iter()
        .map(|k| {
            run_path(
                &sampler,
                half_mu,
                cfg.dt,
                steps,
                stream_rng(cfg.seed, k),
                zero,
                zero,
            )
        })
        .collect::<Result<_>>()?;

    let n = params.n();
    let field_scale = params.gain_ratio() / n;
    let mdm: Vec<f64> = ends.iter().map(|e| e.m.norm_sqr()).collect();
    let madma: Vec<f64> = ends.iter().map(|e| e.ma.norm_sqr()).collect();
    let bdb: Vec<f64> = mdm.iter().map(|v| v * field_scale).collect();
    let proxy: Vec<f64> = madma
        .iter()
        .map(|v| params.gain_ratio() * (n - v / n))
        .collect();
    let b2: Vec<Complex64> = ends.iter().map(|e| e.m * e.m * field_scale).collect();
    let m: Vec<Complex64> = ends.iter().map(|e| e.m).collect();
    let ma: Vec<Complex64> = ends.iter().map(|e| e.ma).collect();

    Ok(LangevinEstimates {
        mdm: EnsembleEstimate::from_independent(&mdm),
        madma: EnsembleEstimate::from_independent(&madma),
        bdb: EnsembleEstimate::from_independent(&bdb),
        bbdag_proxy: EnsembleEstimate::from_independent(&proxy),
        b2: EnsembleEstimate::from_independent_complex(&b2),
        m_mean: EnsembleEstimate::from_independent_complex(&m),
        ma_mean: EnsembleEstimate::from_independent_complex(&ma),
        steps,
        run: RunInfo::new(cfg.seed),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftConfig {
    pub n_traj: usize,
    pub dt: f64,
    pub seed: u64,
    /// Regression window `[0, t_end]`.
    pub t_end: f64,
    pub n_intervals: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftInterval {
    pub t_start: f64,
    pub t_stop: f64,
    /// `Δ⟨m†m⟩ / Δt` measured from the ensemble.
    pub measured: f64,
    /// Time average of `−μ⟨m†m⟩ + μ⟨m_a†m_a⟩ + r_a N²` over the interval.
    pub law: f64,
    /// Standard error of `measured − law`.
    pub std_error: f64,
}

impl DriftInterval {
    pub fn z_score(&self) -> f64 {
        (self.measured - self.law) / self.std_error
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftRegression {
    pub intervals: Vec<DriftInterval>,
    /// Least-squares slope of measured against law drift (ideal 1).
    pub slope: f64,
    pub max_abs_z: f64,
    pub run: RunInfo,
}

impl DriftRegression {
    pub fn consistent(&self, n_sigma: f64) -> bool {
        self.max_abs_z <= n_sigma
    }
}

/// Checks the `⟨m†m⟩` moment law against finite differences of an ensemble.
///
/// Trajectories start with `m_a` drawn from its stationary law and `m = m_a`,
/// so `⟨m†m⟩` relaxes upward with a non-trivial drift. On each interval the
/// per-trajectory increment of `|m|²` is compared with the integral of the
/// law evaluated along the same trajectory; the mean difference must vanish
/// within its standard error.
pub fn drift_regression(
    params: &LaserParams,
    noise: &NoiseModel,
    cfg: &DriftConfig,
) -> Result<DriftRegression> {
    check_step(params, cfg.dt)?;
    if cfg.n_traj < 2 {
        return Err(Error::validation("n_traj", "need at least 2 trajectories"));
    }
    if cfg.n_intervals < 1 {
        return Err(Error::validation("n_intervals", "must be >= 1"));
    }
    let steps = steps_for(cfg.t_end, cfg.dt)?;
    let per_interval = (steps / cfg.n_intervals as u64).max(1);
    let n_int = (steps / per_interval) as usize;
    let sampler = noise.sampler()?;
    let mu = params.mu();
    let half_mu = 0.5 * mu;
    let source = noise.d_mm;
    let dt = cfg.dt;
    let stationary_ma = (noise.d_aa / mu).sqrt();

    // per trajectory: (Δ|m|², ∫law) for every interval
    let rows: Vec<Vec<(f64, f64)>> = (0..cfg.n_traj as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(cfg.seed, k);
            let scale = stationary_ma * std::f64::consts::FRAC_1_SQRT_2;
            let mut ma = Complex64::new(
                scale * rng.sample::<f64, _>(StandardNormal),
                scale * rng.sample::<f64, _>(StandardNormal),
            );
            let mut m = ma;
            let sqrt_dt = dt.sqrt();
            let mut out = Vec::with_capacity(n_int);
            for _ in 0..n_int {
                let start = m.norm_sqr();
                let mut integral = 0.0;
                for _ in 0..per_interval {
                    integral += (-mu * m.norm_sqr() + mu * ma.norm_sqr() + source) * dt;
                    let (dwa, dwm) = sampler.draw(&mut rng, sqrt_dt);
                    let next_ma = ma - ma * (half_mu * dt) + dwa;
                    m = m + (ma - m) * (half_mu * dt) + dwm;
                    ma = next_ma;
                }
                out.push((m.norm_sqr() - start, integral));
            }
            out
        })
        .collect();

    let width = per_interval as f64 * dt;
    let mut intervals = Vec::with_capacity(n_int);
    for i in 0..n_int {
        let inc: Vec<f64> = rows.iter().map(|r| r[i].0).collect();
        let law: Vec<f64> = rows.iter().map(|r| r[i].1).collect();
        let diff: Vec<f64> = inc.iter().zip(&law).map(|(a, b)| a - b).collect();
        let d = EnsembleEstimate::from_independent(&diff);
        let measured = inc.iter().sum::<f64>() / inc.len() as f64 / width;
        let law_mean = law.iter().sum::<f64>() / law.len() as f64 / width;
        if !(measured.is_finite() && law_mean.is_finite()) {
            return Err(Error::Divergence {
                time: (i + 1) as f64 * width,
            });
        }
        intervals.push(DriftInterval {
            t_start: i as f64 * width,
            t_stop: (i + 1) as f64 * width,
            measured,
            law: law_mean,
            std_error: d.std_error / width,
        });
    }
    let sxy: f64 = intervals.iter().map(|iv| iv.measured * iv.law).sum();
    let sxx: f64 = intervals.iter().map(|iv| iv.law * iv.law).sum();
    let max_abs_z = intervals
        .iter()
        .map(|iv| iv.z_score().abs())
        .fold(0.0, f64::max);
    Ok(DriftRegression {
        intervals,
        slope: sxy / sxx,
        max_abs_z,
        run: RunInfo::new(cfg.seed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eta4() -> LaserParams {
        LaserParams::new(1.0, 16.0, 0.0625, 100).unwrap()
    }

    #[test]
    fn cholesky_reproduces_covariance() {
        let l = cholesky2(4.0, 1.0, 2.0).unwrap();
        let c = l * l.transpose();
        assert!((c[(0, 0)] - 4.0).abs() < 1e-14);
        assert!((c[(1, 0)] - 1.0).abs() < 1e-14);
        assert!((c[(1, 1)] - 2.0).abs() < 1e-14);
        assert!(cholesky2(1.0, 2.0, 1.0).is_err());
        assert!(cholesky2(1.0, 1.0, 1.0).is_ok());
        assert_eq!(cholesky2(0.0, 0.0, 0.0).unwrap(), Matrix2::zeros());
    }

    #[test]
    fn stationary_mdm_by_noise_choice() {
        let p = eta4();
        let d = source_strength(&p);
        let mu = p.mu();
        let target = 2.0 * d / mu;
        assert!((NoiseModel::reconstructed(&p).stationary_mdm(mu) - target).abs() < 1e-12 * target);
        let low = NoiseModel::independent(&p).stationary_mdm(mu);
        assert!((target - low - d / (2.0 * mu)).abs() < 1e-12 * target);
    }

    #[test]
    fn step_cap_enforced() {
        let p = eta4();
        let cap = LangevinConfig::max_dt(&p);
        assert!((cap - 0.05 * 2.0 / 16.0).abs() < 1e-15);
        let cfg = LangevinConfig::new(&p, 10, 1.0, 2.0 * cap, 1);
        assert!(matches!(
            langevin_ensemble(&p, &cfg),
            Err(Error::Validation { field: "dt", .. })
        ));
        let cfg = LangevinConfig::new(&p, 1, 1.0, cap, 1);
        assert!(langevin_ensemble(&p, &cfg).is_err());
    }

    #[test]
    fn zero_noise_decays() {
        let p = eta4();
        let mut cfg = LangevinConfig::new(&p, 4, 10.0, 0.005, 1);
        cfg.noise = NoiseModel::zero();
        let est = langevin_ensemble(&p, &cfg).unwrap();
        assert_eq!(est.mdm.mean, 0.0);
        assert_eq!(est.madma.mean, 0.0);
    }

    #[test]
    fn small_ensemble_moments() {
        let p = eta4();
        let cfg = LangevinConfig::new(&p, 2000, 40.0 / p.mu(), LangevinConfig::max_dt(&p), 9);
        let est = langevin_ensemble(&p, &cfg).unwrap();
        let d = source_strength(&p);
        assert!(est.madma.within(d / p.mu(), 3.0), "{:?}", est.madma);
        assert!(est.mdm.within(2.0 * d / p.mu(), 3.0), "{:?}", est.mdm);
        assert!(est.m_mean.within_zero(3.0));
        assert!(est.ma_mean.within_zero(3.0));
        assert!(est.bbdag_proxy.within(analytic::antinormal_moment(&p), 3.0));
    }

    #[test]
    fn step_halving_agrees() {
        let p = eta4();
        let dt = LangevinConfig::max_dt(&p);
        let coarse = LangevinConfig::new(&p, 1000, 20.0 / p.mu(), dt, 31);
        let fine = LangevinConfig {
            dt: 0.5 * dt,
            ..coarse
        };
        let a = langevin_ensemble(&p, &coarse).unwrap().mdm;
        let b = langevin_ensemble(&p, &fine).unwrap().mdm;
        let combined = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
        assert!((a.mean - b.mean).abs() <= 3.0 * combined, "{a:?} {b:?}");
    }

    #[test]
    fn reproducible_across_runs() {
        let p = eta4();
        let cfg = LangevinConfig::new(&p, 16, 5.0, 0.00625, 77);
        assert_eq!(
            langevin_ensemble(&p, &cfg).unwrap(),
            langevin_ensemble(&p, &cfg).unwrap()
        );
    }

    #[test]
    fn phase_sensitive_extension() {
        let p = eta4().with_eta(1.0).unwrap();
        let noise = NoiseModel::with_phase_sensitivity(&p);
        let mut cfg = LangevinConfig::new(&p, 3000, 40.0 / p.mu(), LangevinConfig::max_dt(&p), 4);
        cfg.noise = noise;
        let est = langevin_ensemble(&p, &cfg).unwrap();
        let m2 = est.b2.mean.re * p.n() / p.gain_ratio();
        let target = p.n() * analytic::coherence_mc(&p);
        let se = est.b2.std_error * p.n() / p.gain_ratio();
        assert!((m2 - target).abs() <= 3.0 * se, "{m2} vs {target} ± {se}");

        let too_squeezed = NoiseModel::with_phase_sensitivity(&eta4().with_eta(9.0).unwrap());
        let q = eta4().with_eta(9.0).unwrap();
        let mut cfg = LangevinConfig::new(&q, 4, 1.0, LangevinConfig::max_dt(&q), 1);
        cfg.noise = too_squeezed;
        assert!(langevin_ensemble(&q, &cfg).is_err());
    }

    #[test]
    fn drift_regression_separates_noise_models() {
        let p = eta4();
        let cfg = DriftConfig {
            n_traj: 2000,
            dt: LangevinConfig::max_dt(&p),
            seed: 21,
            t_end: 3.0 / p.mu(),
            n_intervals: 6,
        };
        let good = drift_regression(&p, &NoiseModel::reconstructed(&p), &cfg).unwrap();
        assert!(good.consistent(3.5), "{good:?}");
        let bad = drift_regression(&p, &NoiseModel::independent(&p), &cfg).unwrap();
        assert!(!bad.consistent(3.5));
    }
}
