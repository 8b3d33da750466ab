//! Laser parameters, derived rate constants and threshold classification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative band around `η = 1` treated as threshold.
pub const DEFAULT_THRESHOLD_TOL: f64 = 1e-12;

/// Raw inputs as they appear in a JSON config document.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsInput {
    pub g: f64,
    pub kappa: f64,
    pub pump_rate: f64,
    pub n_atoms: u64,
}

impl ParamsInput {
    pub fn build(&self) -> Result<LaserParams> {
        LaserParams::new(self.g, self.kappa, self.pump_rate, self.n_atoms)
    }
}

/// Validated laser parameters with the derived constants computed once.
///
/// `gamma_c = 4 g² / κ` is the stimulated emission decay constant,
/// `eta = gamma_c / r_a` the regime parameter and `mu = gamma_c + 2 r_a` the
/// aggregate coherence decay rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaserParams {
    g: f64,
    kappa: f64,
    pump_rate: f64,
    n_atoms: u64,
    gamma_c: f64,
    eta: f64,
    mu: f64,
}

fn positive(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(
            field,
            format!("must be finite and > 0, got {value}"),
        ))
    }
}

impl LaserParams {
    pub fn new(g: f64, kappa: f64, pump_rate: f64, n_atoms: u64) -> Result<Self> {
        positive("g", g)?;
        positive("kappa", kappa)?;
        positive("pump_rate", pump_rate)?;
        if n_atoms < 1 {
            return Err(Error::validation("n_atoms", "must be >= 1"));
        }
        let gamma_c = 4.0 * g * g / kappa;
        positive("gamma_c", gamma_c)?;
        Ok(Self {
            g,
            kappa,
            pump_rate,
            n_atoms,
            gamma_c,
            eta: gamma_c / pump_rate,
            mu: gamma_c + 2.0 * pump_rate,
        })
    }

    /// Builds parameters from the cavity damping and the two atomic rates,
    /// solving `gamma_c = 4 g² / κ` for the coupling.
    pub fn from_rates(kappa: f64, gamma_c: f64, pump_rate: f64, n_atoms: u64) -> Result<Self> {
        positive("kappa", kappa)?;
        positive("gamma_c", gamma_c)?;
        Self::new((gamma_c * kappa).sqrt() / 2.0, kappa, pump_rate, n_atoms)
    }

    /// Same coupling and cavity, pump rate chosen so that `γ_c / r_a = eta`.
    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        positive("eta", eta)?;
        Self::new(self.g, self.kappa, self.gamma_c / eta, self.n_atoms)
    }

    pub fn with_n_atoms(&self, n_atoms: u64) -> Result<Self> {
        Self::new(self.g, self.kappa, self.pump_rate, n_atoms)
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn pump_rate(&self) -> f64 {
        self.pump_rate
    }

    pub fn n_atoms(&self) -> u64 {
        self.n_atoms
    }

    /// `N` as a float, for formulas.
    pub fn n(&self) -> f64 {
        self.n_atoms as f64
    }

    pub fn gamma_c(&self) -> f64 {
        self.gamma_c
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `γ_c / κ`, the photon-per-atom scale of every field moment.
    pub fn gain_ratio(&self) -> f64 {
        self.gamma_c / self.kappa
    }

    /// Collective coupling `g / √N` of the field to `m̂` (positive root).
    pub fn collective_coupling(&self) -> f64 {
        self.g / self.n().sqrt()
    }

    /// Fastest rate in the model; sets the default integration step.
    pub fn max_rate(&self) -> f64 {
        self.kappa
            .max(self.mu)
            .max(self.gamma_c)
            .max(self.pump_rate)
    }

    pub fn input(&self) -> ParamsInput {
        ParamsInput {
            g: self.g,
            kappa: self.kappa,
            pump_rate: self.pump_rate,
            n_atoms: self.n_atoms,
        }
    }

    pub fn regime(&self) -> Regime {
        classify_regime(self, DEFAULT_THRESHOLD_TOL)
    }
}

pub fn derive_params(g: f64, kappa: f64, pump_rate: f64, n_atoms: u64) -> Result<LaserParams> {
    LaserParams::new(g, kappa, pump_rate, n_atoms)
}

/// Operating regime, read off the ratio of top to bottom population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `η < 1`: more atoms in the top level than in the bottom level.
    AboveThreshold,
    AtThreshold,
    /// `η > 1`.
    BelowThreshold,
}

/// Classifies by `η`; `|η − 1| ≤ tol` counts as threshold.
pub fn classify_regime(params: &LaserParams, tol: f64) -> Regime {
    classify_eta(params.eta(), tol)
}

pub fn classify_eta(eta: f64, tol: f64) -> Regime {
    if (eta - 1.0).abs() <= tol {
        Regime::AtThreshold
    } else if eta < 1.0 {
        Regime::AboveThreshold
    } else {
        Regime::BelowThreshold
    }
}
