//! Deterministic moment dynamics.
//!
//! The populations, the collective coherences `⟨m̂_a⟩`, `⟨m̂⟩`, the field
//! mean `⟨b̂⟩` and the two second moments `⟨m̂†m̂⟩`, `⟨m̂_a†m̂_a⟩` obey a closed
//! linear system:
//!
//! ```text
//! dN_a/dt = −γ_c N_a + r_a N_c        dm_a/dt = −(μ/2) m_a
//! dN_b/dt = −γ_c N_b + γ_c N_a        dm/dt   = −(μ/2) m + (μ/2) m_a
//! dN_c/dt =  γ_c N_b − r_a N_c        db/dt   = −(κ/2) b + (g/√N) m
//! d⟨m_a†m_a⟩/dt = −μ ⟨m_a†m_a⟩ + r_a N²
//! d⟨m†m⟩/dt     = −μ ⟨m†m⟩ + μ ⟨m_a†m_a⟩ + r_a N²
//! ```
//!
//! It is integrated with classical fixed-step RK4.

use std::io::Write;

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use num_complex::Complex64;
use serde::Serialize;

use crate::analytic::Populations;
use crate::error::{Error, Result};
use crate::model::LaserParams;

const DIM: usize = 12;

/// Records kept per trajectory unless the caller asks otherwise.
pub const DEFAULT_MAX_RECORDS: usize = 2001;

/// Relative change over one relaxation time below which a run counts as
/// stationary.
pub const STEADY_TOL: f64 = 1e-10;

pub const TRAJECTORY_CSV_HEADER: &str = "t,na,nb,nc,re_ma,im_ma,re_m,im_m,re_b,im_b,mdm,madma";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentState {
    pub ma: Complex64,
    pub m: Complex64,
    pub b: Complex64,
    pub na: f64,
    pub nb: f64,
    pub nc: f64,
    pub mdm: f64,
    pub madma: f64,
}

impl MomentState {
    /// All atoms in the bottom level, no coherence, cavity in vacuum.
    pub fn ground(params: &LaserParams) -> Self {
        Self {
            ma: Complex64::new(0.0, 0.0),
            m: Complex64::new(0.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            na: 0.0,
            nb: 0.0,
            nc: params.n(),
            mdm: 0.0,
            madma: 0.0,
        }
    }

    pub fn populations(&self) -> Populations {
        Populations {
            na: self.na,
            nb: self.nb,
            nc: self.nc,
        }
    }

    fn pack(&self) -> [f64; DIM] {
        [
            self.na, self.nb, self.nc, self.ma.re, self.ma.im, self.m.re, self.m.im, self.b.re,
            self.b.im, self.mdm, self.madma, 0.0,
        ]
    }

    fn unpack(y: &[f64; DIM]) -> Self {
        Self {
            na: y[0],
            nb: y[1],
            nc: y[2],
            ma: Complex64::new(y[3], y[4]),
            m: Complex64::new(y[5], y[6]),
            b: Complex64::new(y[7], y[8]),
            mdm: y[9],
            madma: y[10],
        }
    }

    fn validate(&self, params: &LaserParams) -> Result<()> {
        let all = self.pack();
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("init", "non-finite component"));
        }
        if self.na < 0.0 || self.nb < 0.0 || self.nc < 0.0 {
            return Err(Error::validation("init", "negative population"));
        }
        if self.mdm < 0.0 || self.madma < 0.0 {
            return Err(Error::validation("init", "negative second moment"));
        }
        let n = params.n();
        if (self.na + self.nb + self.nc - n).abs() > 1e-9 * n {
            return Err(Error::validation(
                "init",
                format!("populations must sum to N = {n}"),
            ));
        }
        Ok(())
    }
}

struct Rates {
    gamma_c: f64,
    pump: f64,
    half_mu: f64,
    mu: f64,
    half_kappa: f64,
    coupling: f64,
    source: f64,
}

impl Rates {
    fn new(p: &LaserParams) -> Self {
        Self {
            gamma_c: p.gamma_c(),
            pump: p.pump_rate(),
            half_mu: 0.5 * p.mu(),
            mu: p.mu(),
            half_kappa: 0.5 * p.kappa(),
            coupling: p.collective_coupling(),
            source: p.pump_rate() * p.n() * p.n(),
        }
    }

    fn drift(&self, y: &[f64; DIM]) -> [f64; DIM] {
        let [na, nb, nc, ma_re, ma_im, m_re, m_im, b_re, b_im, mdm, madma, _] = *y;
        [
            -self.gamma_c * na + self.pump * nc,
            -self.gamma_c * nb + self.gamma_c * na,
            self.gamma_c * nb - self.pump * nc,
            -self.half_mu * ma_re,
            -self.half_mu * ma_im,
            -self.half_mu * m_re + self.half_mu * ma_re,
            -self.half_mu * m_im + self.half_mu * ma_im,
            -self.half_kappa * b_re + self.coupling * m_re,
            -self.half_kappa * b_im + self.coupling * m_im,
            -self.mu * mdm + self.mu * madma + self.source,
            -self.mu * madma + self.source,
            0.0,
        ]
    }
}

fn axpy(a: f64, x: &[f64; DIM], y: &[f64; DIM]) -> [f64; DIM] {
    std::array::from_fn(|i| y[i] + a * x[i])
}

fn rk4_step(rates: &Rates, y: &[f64; DIM], dt: f64) -> [f64; DIM] {
    let k1 = rates.drift(y);
    let k2 = rates.drift(&axpy(0.5 * dt, &k1, y));
    let k3 = rates.drift(&axpy(0.5 * dt, &k2, y));
    let k4 = rates.drift(&axpy(dt, &k3, y));
    std::array::from_fn(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]))
}

/// Uniform step grid on `[0, t_end]`.
///
/// The step is shrunk so that an integer number of steps lands on `t_end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    pub t_end: f64,
    pub dt: f64,
    pub steps: u64,
    /// Keep every `record_every`-th state (the final state is always kept).
    pub record_every: u64,
}

impl TimeGrid {
    pub fn new(t_end: f64, dt: f64) -> Result<Self> {
        Self::with_max_records(t_end, dt, DEFAULT_MAX_RECORDS)
    }

    pub fn with_max_records(t_end: f64, dt: f64, max_records: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::validation("dt", format!("must be > 0, got {dt}")));
        }
        if !(t_end.is_finite() && t_end >= dt) {
            return Err(Error::validation(
                "t_end",
                format!("must be >= dt, got {t_end}"),
            ));
        }
        let ratio = t_end / dt;
        let steps = if (ratio - ratio.round()).abs() < 1e-9 * ratio {
            ratio.round()
        } else {
            ratio.ceil()
        } as u64;
        let slots = (max_records.max(2) - 1) as u64;
        Ok(Self {
            t_end,
            dt: t_end / steps as f64,
            steps,
            record_every: steps.div_ceil(slots).max(1),
        })
    }

    /// `0.01 / max(κ, μ, γ_c, r_a)`.
    pub fn default_dt(params: &LaserParams) -> f64 {
        0.01 / params.max_rate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryMeta {
    pub dt: f64,
    pub method: &'static str,
    pub params_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<MomentState>,
    pub metadata: TrajectoryMeta,
}

impl Trajectory {
    pub fn last(&self) -> &MomentState {
        self.states
            .last()
            .expect("trajectory always holds the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self
            .times
            .last()
            .expect("trajectory always holds the initial time")
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{TRAJECTORY_CSV_HEADER}")?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let row = [
                *t, s.na, s.nb, s.nc, s.ma.re, s.ma.im, s.m.re, s.m.im, s.b.re, s.b.im, s.mdm,
                s.madma,
            ];
            writeln!(out, "{}", crate::cli::format_row(&row))?;
        }
        Ok(())
    }
}

/// FNV-1a over the bit patterns of the raw inputs.
pub fn params_hash(params: &LaserParams) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for word in [
        params.g().to_bits(),
        params.kappa().to_bits(),
        params.pump_rate().to_bits(),
        params.n_atoms(),
    ] {
        for byte in word.to_le_bytes() {
            h ^= u64::from(byte);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    format!("{h:016x}")
}

fn check_finite(y: &[f64; DIM], time: f64) -> Result<()> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Divergence { time })
    }
}

/// Integrates the moment system from `init` over `grid`.
pub fn evolve_moments(
    params: &LaserParams,
    init: &MomentState,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    init.validate(params)?;
    let rates = Rates::new(params);
    let mut y = init.pack();
    let capacity = (grid.steps / grid.record_every + 2) as usize;
    let mut times = Vec::with_capacity(capacity);
    let mut states = Vec::with_capacity(capacity);
    times.push(0.0);
    states.push(*init);
    for step in 1..=grid.steps {
        y = rk4_step(&rates, &y, grid.dt);
        let t = step as f64 * grid.dt;
        check_finite(&y, t)?;
        if step % grid.record_every == 0 || step == grid.steps {
            times.push(t);
            states.push(MomentState::unpack(&y));
        }
    }
    Ok(Trajectory {
        times,
        states,
        metadata: TrajectoryMeta {
            dt: grid.dt,
            method: "rk4-fixed",
            params_hash: params_hash(params),
        },
    })
}

/// Slowest relaxation time of the linear system.
///
/// The population sector relaxes at `Re λ = −(2γ_c + r_a)/2`, the
/// coherences at `μ/2`, the field at `κ/2`.
pub fn relaxation_time(params: &LaserParams) -> f64 {
    let slowest = (0.5 * (2.0 * params.gamma_c() + params.pump_rate()))
        .min(0.5 * params.mu())
        .min(0.5 * params.kappa());
    1.0 / slowest
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyRun {
    pub state: MomentState,
    pub time: f64,
    pub converged: bool,
}

/// Integrates until the relative state change over one relaxation time
/// drops below [`STEADY_TOL`], or `t_max` is reached.
pub fn evolve_to_steady_state(
    params: &LaserParams,
    init: &MomentState,
    dt: f64,
    t_max: f64,
) -> Result<SteadyRun> {
    init.validate(params)?;
    let grid = TimeGrid::with_max_records(t_max, dt, 2)?;
    let rates = Rates::new(params);
    let window = ((relaxation_time(params) / grid.dt).ceil() as u64).max(1);
    let mut y = init.pack();
    let mut reference = y;
    for step in 1..=grid.steps {
        y = rk4_step(&rates, &y, grid.dt);
        let t = step as f64 * grid.dt;
        check_finite(&y, t)?;
        if step % window == 0 {
            let change = relative_change(&reference, &y);
            if change < STEADY_TOL {
                return Ok(SteadyRun {
                    state: MomentState::unpack(&y),
                    time: t,
                    converged: true,
                });
            }
            reference = y;
        }
    }
    Ok(SteadyRun {
        state: MomentState::unpack(&y),
        time: grid.steps as f64 * grid.dt,
        converged: false,
    })
}

fn relative_change(a: &[f64; DIM], b: &[f64; DIM]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let norm: f64 = b.iter().map(|x| x * x).sum();
    (diff / norm.max(f64::MIN_POSITIVE)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyState {
    pub populations: Populations,
    pub mdm: f64,
    pub madma: f64,
}

/// Solves for the fixed point directly.
///
/// The rate matrix is singular (it conserves `N_a + N_b + N_c`), so its last
/// row is replaced by the completeness constraint.
pub fn steady_state_solve(params: &LaserParams) -> Result<SteadyState> {
    let g = params.gamma_c();
    let r = params.pump_rate();
    let n = params.n();
    let rates = Matrix3::new(
        -g, 0.0, r, //
        g, -g, 0.0, //
        1.0, 1.0, 1.0,
    );
    let pops = rates
        .lu()
        .solve(&Vector3::new(0.0, 0.0, n))
        .ok_or(Error::Singular("population rate matrix"))?;

    let mu = params.mu();
    let source = r * n * n;
    // unknowns (mdm, madma)
    let second = Matrix2::new(
        -mu, mu, //
        0.0, -mu,
    );
    let moments = second
        .lu()
        .solve(&Vector2::new(-source, -source))
        .ok_or(Error::Singular("second-moment matrix"))?;

    Ok(SteadyState {
        populations: Populations {
            na: pops[0],
            nb: pops[1],
            nc: pops[2],
        },
        mdm: moments[0],
        madma: moments[1],
    })
}

/// Field mean relaxing from `b0` with the atomic coherences held at zero.
///
/// Populations start at their steady values so only `b` moves in the
/// coherent sector; the exact answer is `b0·e^{−κt/2}`.
pub fn mean_field_trace(
    params: &LaserParams,
    b0: Complex64,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    let pops = crate::analytic::steady_populations(params);
    let init = MomentState {
        b: b0,
        na: pops.na,
        nb: pops.nb,
        nc: pops.nc,
        ..MomentState::ground(params)
    };
    evolve_moments(params, &init, &TimeGrid::new(t_end, dt)?)
}
