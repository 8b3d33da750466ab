//! Exact jump-process simulation of the atomic populations.
//!
//! Each atom cycles a → b (rate γ_c), b → c (rate γ_c), c → a (rate r_a).
//! Atoms are independent, so the aggregate counts form a Markov chain with
//! propensities `γ_c N_a`, `γ_c N_b`, `r_a N_c`, stepped with the direct
//! method. Level occupancies are time-averaged after burn-in and their
//! standard errors come from batch means.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{stream_rng, EnsembleEstimate, RunInfo};
use crate::analytic::Populations;
use crate::error::{Error, Result};
use crate::model::LaserParams;

pub const MIN_BATCHES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpConfig {
    pub n_atoms: u64,
    pub t_end: f64,
    pub burn_in: f64,
    pub seed: u64,
    /// Spacing of the snapshot trace; estimates use exact time integrals.
    pub sample_stride: f64,
    #[serde(default = "default_batches")]
    pub n_batches: usize,
}

fn default_batches() -> usize {
    MIN_BATCHES
}

impl JumpConfig {
    pub fn new(n_atoms: u64, t_end: f64, burn_in: f64, seed: u64) -> Self {
        Self {
            n_atoms,
            t_end,
            burn_in,
            seed,
            sample_stride: (t_end - burn_in) / 100.0,
            n_batches: MIN_BATCHES,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_atoms < 1 {
            return Err(Error::validation("n_atoms", "must be >= 1"));
        }
        if !(self.burn_in >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::validation(
                "burn_in",
                "must be >= 0 with finite t_end",
            ));
        }
        if self.burn_in >= self.t_end {
            return Err(Error::validation(
                "burn_in",
                "post-burn-in window is empty (burn_in >= t_end)",
            ));
        }
        if !(self.sample_stride > 0.0) {
            return Err(Error::validation("sample_stride", "must be > 0"));
        }
        if self.n_batches < MIN_BATCHES {
            return Err(Error::validation(
                "n_batches",
                format!("need at least {MIN_BATCHES} batches"),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GillespieResult {
    /// Time-averaged occupations over `[burn_in, t_end]`.
    pub populations: Populations,
    /// Per-level time-averaged counts (top, middle, bottom).
    pub levels: [EnsembleEstimate; 3],
    /// Snapshots `(t, N_a, N_b, N_c)` every `sample_stride`.
    pub trace: Vec<(f64, u64, u64, u64)>,
    pub events: u64,
    pub run: RunInfo,
}

impl GillespieResult {
    /// Level fractions with standard errors.
    pub fn fractions(&self, n_atoms: u64) -> [EnsembleEstimate; 3] {
        let n = n_atoms as f64;
        self.levels.map(|e| EnsembleEstimate {
            mean: e.mean / n,
            std_error: e.std_error / n,
            ..e
        })
    }
}

struct Accumulator {
    start: f64,
    width: f64,
    batches: Vec<[f64; 3]>,
    /// Time integrals of N and N² over the whole window.
    first: [f64; 3],
    second: [f64; 3],
}

impl Accumulator {
    fn new(start: f64, end: f64, n_batches: usize) -> Self {
        Self {
            start,
            width: (end - start) / n_batches as f64,
            batches: vec![[0.0; 3]; n_batches],
            first: [0.0; 3],
            second: [0.0; 3],
        }
    }

    /// Adds the constant state `counts` held over `[from, to)`.
    fn hold(&mut self, from: f64, to: f64, counts: [u64; 3]) {
        let n = self.batches.len();
        let end = self.start + self.width * n as f64;
        let to = to.min(end);
        let mut a = from.max(self.start);
        if a >= to {
            return;
        }
        let mut idx = (((a - self.start) / self.width) as usize).min(n - 1);
        loop {
            let batch_end = if idx == n - 1 {
                end
            } else {
                self.start + (idx + 1) as f64 * self.width
            };
            let seg_end = batch_end.min(to);
            if seg_end > a {
                let span = seg_end - a;
                for (lvl, &c) in counts.iter().enumerate() {
                    let c = c as f64;
                    self.batches[idx][lvl] += c * span;
                    self.first[lvl] += c * span;
                    self.second[lvl] += c * c * span;
                }
            }
            if seg_end >= to || idx == n - 1 {
                break;
            }
            a = seg_end;
            idx += 1;
        }
    }

    fn estimates(&self, events: u64) -> [EnsembleEstimate; 3] {
        let nb = self.batches.len() as f64;
        let total = self.width * nb;
        std::array::from_fn(|lvl| {
            let means: Vec<f64> = self.batches.iter().map(|b| b[lvl] / self.width).collect();
            let (mean, var) = super::mean_and_variance(&means);
            let std_error = (var / nb).sqrt();
            let m1 = self.first[lvl] / total;
            let pointwise_var = (self.second[lvl] / total - m1 * m1).max(0.0);
            let effective_samples = if std_error > 0.0 {
                pointwise_var / (std_error * std_error)
            } else {
                f64::INFINITY
            };
            EnsembleEstimate {
                mean,
                std_error,
                n_samples: events,
                effective_samples,
            }
        })
    }
}

/// Runs the jump process from all atoms in the bottom level.
pub fn gillespie_populations(params: &LaserParams, cfg: &JumpConfig) -> Result<GillespieResult> {
    cfg.validate()?;
    let gamma = params.gamma_c();
    let pump = params.pump_rate();
    let mut rng = stream_rng(cfg.seed, 0);
    let mut counts: [u64; 3] = [0, 0, cfg.n_atoms];
    let mut acc = Accumulator::new(cfg.burn_in, cfg.t_end, cfg.n_batches);
    let mut trace = Vec::new();
    let mut sample_idx = 0u64;
    let mut events_in_window = 0u64;
    let mut t = 0.0;

    while t < cfg.t_end {
        let rates = [
            gamma * counts[0] as f64,
            gamma * counts[1] as f64,
            pump * counts[2] as f64,
        ];
        let total: f64 = rates.iter().sum();
        // total > 0 always: the N atoms occupy some level and every rate is positive
        let u: f64 = rng.random();
        let wait = -(1.0 - u).ln() / total;
        let t_next = (t + wait).min(cfg.t_end);

        loop {
            let ts = sample_idx as f64 * cfg.sample_stride;
            if ts > t_next {
                break;
            }
            trace.push((ts, counts[0], counts[1], counts[2]));
            sample_idx += 1;
        }
        acc.hold(t, t_next, counts);
        t = t_next;
        if t >= cfg.t_end {
            break;
        }

        let pick = rng.random::<f64>() * total;
        let from = if pick < rates[0] {
            0
        } else if pick < rates[0] + rates[1] {
            1
        } else {
            2
        };
        counts[from] -= 1;
        counts[(from + 1) % 3] += 1;
        if t >= cfg.burn_in {
            events_in_window += 1;
        }
    }

    let levels = acc.estimates(events_in_window);
    Ok(GillespieResult {
        populations: Populations {
            na: levels[0].mean,
            nb: levels[1].mean,
            nc: levels[2].mean,
        },
        levels,
        trace,
        events: events_in_window,
        run: RunInfo::new(cfg.seed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eta4() -> LaserParams {
        LaserParams::from_rates(16.0, 1.0, 0.25, 1000).unwrap()
    }

    #[test]
    fn fractions_match_closed_form() {
        let cfg = JumpConfig::new(1000, 2000.0, 50.0, 11);
        let res = gillespie_populations(&eta4(), &cfg).unwrap();
        let f = res.fractions(1000);
        for (est, want) in f.iter().zip([1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0]) {
            assert!(est.within(want, 3.0), "{est:?} vs {want}");
        }
        assert!((res.populations.total() - 1000.0).abs() < 1e-6);
    }

    #[test]
    fn threshold_is_uniform() {
        let p = LaserParams::from_rates(16.0, 1.0, 1.0, 999).unwrap();
        let res = gillespie_populations(&p, &JumpConfig::new(999, 1500.0, 30.0, 5)).unwrap();
        for est in res.fractions(999) {
            assert!(est.within(1.0 / 3.0, 3.0), "{est:?}");
        }
    }

    #[test]
    fn fast_pump_empties_bottom_level() {
        let p = LaserParams::from_rates(16.0, 1.0, 1000.0, 200).unwrap();
        let res = gillespie_populations(&p, &JumpConfig::new(200, 100.0, 10.0, 3)).unwrap();
        let f = res.fractions(200);
        assert!(f[2].mean < 0.005);
        assert!(f[2].within(1e-3 / (1e-3 + 2.0), 3.0));
    }

    #[test]
    fn reproducible() {
        let cfg = JumpConfig::new(100, 200.0, 10.0, 42);
        let a = gillespie_populations(&eta4(), &cfg).unwrap();
        let b = gillespie_populations(&eta4(), &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn trace_spacing() {
        let mut cfg = JumpConfig::new(50, 10.0, 1.0, 1);
        cfg.sample_stride = 0.5;
        let res = gillespie_populations(&eta4(), &cfg).unwrap();
        assert_eq!(res.trace.len(), 21);
        assert_eq!(res.trace[0], (0.0, 0, 0, 50));
        for (_, a, b, c) in &res.trace {
            assert_eq!(a + b + c, 50);
        }
    }

    #[test]
    fn config_errors() {
        let p = eta4();
        let empty = JumpConfig::new(10, 5.0, 5.0, 1);
        assert!(matches!(
            gillespie_populations(&p, &empty),
            Err(Error::Validation {
                field: "burn_in",
                ..
            })
        ));
        let mut few = JumpConfig::new(10, 5.0, 1.0, 1);
        few.n_batches = 5;
        assert!(gillespie_populations(&p, &few).is_err());
    }
}
