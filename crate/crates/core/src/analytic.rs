//! Closed-form steady-state results.
//!
//! Everything is written in terms of `η = γ_c / r_a` and the ratio `γ_c / κ`;
//! `N` only enters linearly through `⟨N_a⟩ = N / (η + 2)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LaserParams, Regime};

/// Relative agreement required between the two photon-variance routes.
pub const VARIANCE_IDENTITY_TOL: f64 = 1e-12;

/// Mean level occupations `⟨N_a⟩, ⟨N_b⟩, ⟨N_c⟩` (top, middle, bottom).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Populations {
    pub na: f64,
    pub nb: f64,
    pub nc: f64,
}

impl Populations {
    pub fn total(&self) -> f64 {
        self.na + self.nb + self.nc
    }

    pub fn fractions(&self) -> [f64; 3] {
        let t = self.total();
        [self.na / t, self.nb / t, self.nc / t]
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.na, self.nb, self.nc]
    }
}

/// Every steady-state quantity for one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatisticsReport {
    pub populations: Populations,
    pub mc: f64,
    pub nbar: f64,
    pub nvar: f64,
    pub bbdag: f64,
    pub b2: f64,
    pub var_plus: f64,
    pub var_minus: f64,
    pub var_coherent: f64,
    pub squeezing: f64,
    pub squeezing_out: f64,
    pub commutator: f64,
    pub uncertainty_bound: f64,
    pub regime: Regime,
}

pub fn steady_populations(params: &LaserParams) -> Populations {
    let na = params.n() / (params.eta() + 2.0);
    Populations {
        na,
        nb: na,
        nc: params.eta() * na,
    }
}

/// `⟨m̂_c⟩ = √(⟨N_a⟩⟨N_c⟩) = √η ⟨N_a⟩`, taken real and non-negative.
pub fn coherence_mc(params: &LaserParams) -> f64 {
    params.eta().sqrt() * steady_populations(params).na
}

/// `n̄ = (γ_c/κ)(⟨N_a⟩ + ⟨N_b⟩)`.
pub fn mean_photon_number(params: &LaserParams) -> f64 {
    let p = steady_populations(params);
    params.gain_ratio() * (p.na + p.nb)
}

/// `⟨b̂b̂†⟩ = (γ_c/κ)(⟨N_b⟩ + ⟨N_c⟩)`.
pub fn antinormal_moment(params: &LaserParams) -> f64 {
    let p = steady_populations(params);
    params.gain_ratio() * (p.nb + p.nc)
}

/// `⟨b̂²⟩ = (γ_c/κ) √η ⟨N_a⟩`, which is also `(γ_c/κ) ⟨m̂_c⟩`.
pub fn anomalous_moment(params: &LaserParams) -> f64 {
    params.gain_ratio() * coherence_mc(params)
}

/// `(Δn)²` for a zero-mean Gaussian field, `n̄⟨b̂b̂†⟩ + ⟨b̂²⟩²`.
///
/// The same quantity has the closed form `n̄² (3η + 2) / 4`; both are
/// evaluated and must agree to [`VARIANCE_IDENTITY_TOL`].
pub fn photon_variance(params: &LaserParams) -> Result<f64> {
    let nbar = mean_photon_number(params);
    let b2 = anomalous_moment(params);
    let assembled = nbar * antinormal_moment(params) + b2 * b2;
    let closed = 0.25 * nbar * nbar * (3.0 * params.eta() + 2.0);
    let deviation = (assembled - closed).abs() / closed.abs().max(f64::MIN_POSITIVE);
    if deviation > VARIANCE_IDENTITY_TOL {
        return Err(Error::Invariant {
            what: "photon variance assembly vs closed form",
            deviation,
        });
    }
    Ok(assembled)
}

/// `((Δb₊)², (Δb₋)²) = (γ_c/κ)(N + ⟨N_a⟩ ± 2√η⟨N_a⟩)`.
pub fn quadrature_variances(params: &LaserParams) -> (f64, f64) {
    let na = steady_populations(params).na;
    let cross = 2.0 * params.eta().sqrt() * na;
    let base = params.n() + na;
    let c = params.gain_ratio();
    (c * (base + cross), c * (base - cross))
}

/// Quadrature variance of coherent light at the same scale, `(γ_c/κ) N`.
pub fn coherent_reference_variance(params: &LaserParams) -> f64 {
    params.gain_ratio() * params.n()
}

/// Squeezing as a function of `η` alone: `(2√η − 1) / (η + 2)`.
pub fn squeezing_of_eta(eta: f64) -> f64 {
    (2.0 * eta.sqrt() - 1.0) / (eta + 2.0)
}

/// Cavity and output squeezing `(S, S_out)`.
///
/// The output field is `√κ b̂`, which rescales both the squeezed and the
/// coherent variance by `κ`, so `S_out` is `S`.
pub fn quadrature_squeezing(params: &LaserParams) -> (f64, f64) {
    let s = squeezing_of_eta(params.eta());
    (s, s)
}

/// `(⟨[b̂,b̂†]⟩, bound, Δb₊Δb₋)` with bound `(γ_c/κ)|⟨N_a⟩ − ⟨N_c⟩|`.
pub fn quantum_diagnostics(params: &LaserParams) -> (f64, f64, f64) {
    let p = steady_populations(params);
    let c = params.gain_ratio();
    let (vp, vm) = quadrature_variances(params);
    (c * (p.nc - p.na), c * (p.na - p.nc).abs(), (vp * vm).sqrt())
}

pub fn statistics_report(params: &LaserParams) -> Result<StatisticsReport> {
    let (var_plus, var_minus) = quadrature_variances(params);
    let (squeezing, squeezing_out) = quadrature_squeezing(params);
    let (commutator, uncertainty_bound, _) = quantum_diagnostics(params);
    Ok(StatisticsReport {
        populations: steady_populations(params),
        mc: coherence_mc(params),
        nbar: mean_photon_number(params),
        nvar: photon_variance(params)?,
        bbdag: antinormal_moment(params),
        b2: anomalous_moment(params),
        var_plus,
        var_minus,
        var_coherent: coherent_reference_variance(params),
        squeezing,
        squeezing_out,
        commutator,
        uncertainty_bound,
        regime: params.regime(),
    })
}
