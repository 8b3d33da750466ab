//! Two-time field correlation `⟨b*(t) b(t+τ)⟩` from a co-integrated field.
//!
//! The regression picture slaves `m_a` to its noise, which turns the
//! coherence equation into a single Ornstein–Uhlenbeck process driven by
//! `F_a + F_m`:
//!
//! ```text
//! dm = −(μ/2) m dt + dW,          ⟨dW* dW⟩ = 2 r_a N² dt
//! db = −(κ/2) b dt + (g/√N) m dt
//! ```
//!
//! The strength `2 r_a N²` keeps `⟨m†m⟩ = 2 r_a N² / μ`. For this pair the
//! stationary correlation is exactly
//! `⟨b†b⟩ [κ e^{−μτ/2} − μ e^{−κτ/2}] / (κ − μ)` with
//! `⟨b†b⟩ = n̄ κ / (κ + μ)`, which tends to the slaved value `n̄` when
//! `μ ≪ κ`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::langevin::{source_strength, steps_for, DT_CAP_FRACTION};
use super::{stream_rng, EnsembleEstimate, RunInfo};
use crate::analytic;
use crate::error::{Error, Result};
use crate::model::LaserParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationConfig {
    pub n_traj: usize,
    pub t_anchor: f64,
    pub tau_grid: Vec<f64>,
    pub dt: f64,
    pub seed: u64,
}

impl CorrelationConfig {
    /// Earliest admissible anchor, `10 / min(μ, κ)`.
    pub fn min_anchor(params: &LaserParams) -> f64 {
        10.0 / params.mu().min(params.kappa())
    }

    fn validate(&self, params: &LaserParams) -> Result<()> {
        if self.n_traj < 2 {
            return Err(Error::validation("n_traj", "need at least 2 trajectories"));
        }
        let cap = DT_CAP_FRACTION * (2.0 / params.mu()).min(2.0 / params.kappa());
        if !(self.dt > 0.0 && self.dt <= cap * (1.0 + 1e-12)) {
            return Err(Error::validation(
                "dt",
                format!("must satisfy 0 < dt <= {cap:e}, got {}", self.dt),
            ));
        }
        if !(self.t_anchor >= Self::min_anchor(params)) {
            return Err(Error::validation(
                "t_anchor",
                format!("must be >= 10/min(μ, κ) = {}", Self::min_anchor(params)),
            ));
        }
        if self.tau_grid.is_empty() {
            return Err(Error::validation("tau_grid", "empty"));
        }
        if self.tau_grid[0] < 0.0 || self.tau_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::validation(
                "tau_grid",
                "must be non-negative and strictly increasing",
            ));
        }
        if self.tau_grid.iter().any(|t| !t.is_finite()) {
            return Err(Error::validation("tau_grid", "non-finite lag"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationPoint {
    /// Lag actually sampled (requested lag rounded to the step grid).
    pub tau: f64,
    /// `Re ⟨b*(t) b(t+τ)⟩`.
    pub estimate: EnsembleEstimate,
    pub imag_mean: f64,
    pub model: f64,
    pub deviation_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub points: Vec<CorrelationPoint>,
    /// Stationary `⟨b†b⟩` of the co-integrated field.
    pub bdb_stationary: f64,
    /// Slaved-field photon number `n̄`.
    pub nbar: f64,
    pub run: RunInfo,
}

impl CorrelationReport {
    pub fn max_abs_deviation(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.deviation_sigma.abs())
            .fold(0.0, f64::max)
    }
}

/// `[κ e^{−μτ/2} − μ e^{−κτ/2}] / (κ − μ)`, written without cancellation:
/// `e^{−μτ/2} [1 − μ·expm1(−(κ−μ)τ/2)/(κ−μ)]`, which tends to
/// `e^{−κτ/2}(1 + κτ/2)` as `μ → κ`.
pub fn regression_bracket(kappa: f64, mu: f64, tau: f64) -> f64 {
    let delta = kappa - mu;
    let tail = if delta == 0.0 {
        0.5 * tau
    } else {
        -(-0.5 * delta * tau).exp_m1() / delta
    };
    (-0.5 * mu * tau).exp() * (1.0 + mu * tail)
}

/// Stationary `⟨b†b⟩` of the co-integrated field, `n̄ κ / (κ + μ)`.
pub fn cointegrated_photon_number(params: &LaserParams) -> f64 {
    analytic::mean_photon_number(params) * params.kappa() / (params.kappa() + params.mu())
}

pub fn two_time_correlation(
    params: &LaserParams,
    cfg: &CorrelationConfig,
) -> Result<CorrelationReport> {
    cfg.validate(params)?;
    let dt = cfg.dt;
    let anchor_steps = steps_for(cfg.t_anchor, dt)?;
    let lag_steps: Vec<u64> = cfg
        .tau_grid
        .iter()
        .map(|t| (t / dt).round() as u64)
        .collect();
    let total_steps = anchor_steps + lag_steps.last().copied().unwrap_or(0);

    let half_mu_dt = 0.5 * params.mu() * dt;
    let half_kappa_dt = 0.5 * params.kappa() * dt;
    let coupling_dt = params.collective_coupling() * dt;
    // complex increment with ⟨|dW|²⟩ = 2 r_a N² dt: each quadrature carries half
    let sigma = (source_strength(params) * dt).sqrt();

    let rows: Vec<Vec<Complex64>> = (0..cfg.n_traj as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(cfg.seed, k);
            let mut m = Complex64::new(0.0, 0.0);
            let mut b = Complex64::new(0.0, 0.0);
            let mut anchor = Complex64::new(0.0, 0.0);
            let mut products = Vec::with_capacity(lag_steps.len());
            let mut next = 0;
            for step in 0..=total_steps {
                if step == anchor_steps {
                    anchor = b.conj();
                }
                while next < lag_steps.len() && step == anchor_steps + lag_steps[next] {
                    products.push(anchor * b);
                    next += 1;
                }
                if step == total_steps {
                    break;
                }
                let dw = Complex64::new(
                    rng.sample::<f64, _>(StandardNormal),
                    rng.sample::<f64, _>(StandardNormal),
                ) * sigma;
                let next_b = b - b * half_kappa_dt + m * coupling_dt;
                m = m - m * half_mu_dt + dw;
                b = next_b;
            }
            products
        })
        .collect();

    let bdb_stationary = cointegrated_photon_number(params);
    let mut points = Vec::with_capacity(lag_steps.len());
    for (i, &lag) in lag_steps.iter().enumerate() {
        let re: Vec<f64> = rows.iter().map(|r| r[i].re).collect();
        let im_mean = rows.iter().map(|r| r[i].im).sum::<f64>() / rows.len() as f64;
        let estimate = EnsembleEstimate::from_independent(&re);
        if !(estimate.mean.is_finite() && im_mean.is_finite()) {
            return Err(Error::Divergence {
                time: (anchor_steps + lag) as f64 * dt,
            });
        }
        let tau = lag as f64 * dt;
        let model = bdb_stationary * regression_bracket(params.kappa(), params.mu(), tau);
        points.push(CorrelationPoint {
            tau,
            estimate,
            imag_mean: im_mean,
            model,
            deviation_sigma: estimate.z_score(model),
        });
    }
    Ok(CorrelationReport {
        points,
        bdb_stationary,
        nbar: analytic::mean_photon_number(params),
        run: RunInfo::new(cfg.seed),
    })
}
