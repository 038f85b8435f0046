//! Kinetic Monte Carlo model of two-state dipole switching and the resulting
//! conductance-noise current.
//!
//! Each dipole sits in one of two polarization states and flips as a Poisson
//! process with the thermally activated rate `λ = A·exp(−E/kT)`. The mean
//! polarization `P` sets the bound charge `ρ_B = ρ_init − (P − P(0))/L`, the
//! resistance is `R = R₀/max(|ρ_B|, ρ_floor)` and the current is `I = V/R`
//! (or a Poole–Frenkel density when that coupling is selected).
//!
//! Quantities are in a coherent set of model units: the default preset has
//! `|ρ_B(0)| = 1`, `L = 1` and polarization states `±1`, with `R₀` and `V`
//! calibrated so the mean current is 1 µA at 0.05 V.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::config::{parse_value, Configurable, KeyValues};
use crate::error::{Error, Result};

/// Boltzmann constant in eV/K.
pub const BOLTZMANN_EV: f64 = 8.617_333_262e-5;

/// Largest `λ·dt` accepted; keeps the per-step Poisson approximation valid.
pub const MAX_RATE_DT: f64 = 0.1;

/// Window of the charge integration used by the analysis defaults, seconds.
pub const DEFAULT_CHARGE_WINDOW: f64 = 0.067;

/// The simulator's generator: xoshiro256++ seeded through SplitMix64. Its
/// output sequence is fixed by the algorithm, independent of platform.
pub type SimRng = Xoshiro256PlusPlus;

pub fn sim_rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    Ohmic,
    PooleFrenkel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub n_dipoles: usize,
    /// Attempt rate `A`, Hz.
    pub prefactor_a: f64,
    /// Activation barrier `E`, eV.
    pub barrier_e: f64,
    /// Kelvin.
    pub temperature_t: f64,
    /// Bias across the device, volts.
    pub bias_v: f64,
    /// Resistance scale `R₀`, ohms.
    pub r0: f64,
    /// Characteristic length `L` linking polarization to bound charge.
    pub length_l: f64,
    pub p_low: f64,
    pub p_high: f64,
    /// Seconds per step.
    pub dt: f64,
    pub n_steps: usize,
    pub seed: u64,
    pub coupling: Coupling,
    /// Poole–Frenkel zero-field current density.
    pub j0: f64,
    /// Poole–Frenkel constant.
    pub beta: f64,
    /// Smallest `|ρ_B|` used as a divisor.
    pub rho_floor: f64,
    /// Bound charge at step zero.
    pub rho_init: f64,
    /// Poole–Frenkel: field at the initial bound charge.
    pub pf_field0: f64,
    /// Poole–Frenkel: field change per unit of `−L·Δρ_B`.
    pub pf_field_scale: f64,
    /// Poole–Frenkel: conduction cross-section turning density into current.
    pub pf_area: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams::paper_power()
    }
}

impl SimParams {
    /// Calibration preset: 0.05 V bias and `R₀ = 5·10⁴ Ω` at `|ρ_B| = 1`, so
    /// the mean current is 1 µA and the mean power 0.05 µW.
    pub fn paper_power() -> Self {
        SimParams {
            n_dipoles: 256,
            prefactor_a: 1.0e3,
            barrier_e: 0.2,
            temperature_t: 300.0,
            bias_v: 0.05,
            r0: 5.0e4,
            length_l: 1.0,
            p_low: -1.0,
            p_high: 1.0,
            dt: 0.067,
            n_steps: 100_000,
            seed: 1,
            coupling: Coupling::Ohmic,
            j0: 1.0,
            beta: 1.0,
            rho_floor: 1e-6,
            rho_init: 1.0,
            pf_field0: 4.0,
            pf_field_scale: 1.0,
            pf_area: 1e-7,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("prefactor_a", self.prefactor_a),
            ("barrier_e", self.barrier_e),
            ("temperature_t", self.temperature_t),
            ("bias_v", self.bias_v),
            ("r0", self.r0),
            ("length_l", self.length_l),
            ("p_low", self.p_low),
            ("p_high", self.p_high),
            ("dt", self.dt),
            ("j0", self.j0),
            ("beta", self.beta),
            ("rho_floor", self.rho_floor),
            ("rho_init", self.rho_init),
            ("pf_field0", self.pf_field0),
            ("pf_field_scale", self.pf_field_scale),
            ("pf_area", self.pf_area),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        if self.n_dipoles == 0 {
            return Err(Error::param("n_dipoles", "must be at least 1"));
        }
        if self.prefactor_a < 0.0 {
            return Err(Error::param("prefactor_a", "must be non-negative"));
        }
        if self.barrier_e < 0.0 {
            return Err(Error::param("barrier_e", "must be non-negative"));
        }
        if self.temperature_t <= 0.0 {
            return Err(Error::param("temperature_t", "must be positive"));
        }
        if self.dt <= 0.0 {
            return Err(Error::param("dt", "must be positive"));
        }
        if self.p_low >= self.p_high {
            return Err(Error::param("p_low", "must be below p_high"));
        }
        if self.rho_floor <= 0.0 {
            return Err(Error::param("rho_floor", "must be positive"));
        }
        if self.r0 <= 0.0 {
            return Err(Error::param("r0", "must be positive"));
        }
        if self.length_l <= 0.0 {
            return Err(Error::param("length_l", "must be positive"));
        }
        let rate_dt = switching_rate(self) * self.dt;
        if rate_dt > MAX_RATE_DT {
            return Err(Error::param(
                "dt",
                format!("rate·dt = {rate_dt:.4} exceeds {MAX_RATE_DT}; reduce dt or the rate"),
            ));
        }
        if self.coupling == Coupling::PooleFrenkel {
            if self.pf_area <= 0.0 {
                return Err(Error::param("pf_area", "must be positive"));
            }
            // The field must stay non-negative over every reachable polarization.
            let swing = self.pf_field_scale.abs() * (self.p_high - self.p_low);
            if self.pf_field0 < swing {
                return Err(Error::param(
                    "pf_field0",
                    format!("must be at least |pf_field_scale|·(p_high − p_low) = {swing}"),
                ));
            }
        }
        Ok(())
    }

    /// Per-step flip probability, `1 − exp(−λ·dt)`.
    pub fn flip_probability(&self) -> f64 {
        -(-switching_rate(self) * self.dt).exp_m1()
    }

    pub fn duration(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }

    pub fn from_kv_text(text: &str) -> Result<Self> {
        let kv = crate::config::KeyValues::parse(text)?;
        let mut p = SimParams::default();
        p.apply(&kv)?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_kv_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.key_values() {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    pub fn key_values(&self) -> Vec<(&'static str, String)> {
        vec![
            ("n_dipoles", self.n_dipoles.to_string()),
            ("prefactor_a", fmt_f64(self.prefactor_a)),
            ("barrier_e", fmt_f64(self.barrier_e)),
            ("temperature_t", fmt_f64(self.temperature_t)),
            ("bias_v", fmt_f64(self.bias_v)),
            ("r0", fmt_f64(self.r0)),
            ("length_l", fmt_f64(self.length_l)),
            ("p_low", fmt_f64(self.p_low)),
            ("p_high", fmt_f64(self.p_high)),
            ("dt", fmt_f64(self.dt)),
            ("n_steps", self.n_steps.to_string()),
            ("seed", self.seed.to_string()),
            (
                "coupling",
                match self.coupling {
                    Coupling::Ohmic => "ohmic".into(),
                    Coupling::PooleFrenkel => "poole_frenkel".into(),
                },
            ),
            ("j0", fmt_f64(self.j0)),
            ("beta", fmt_f64(self.beta)),
            ("rho_floor", fmt_f64(self.rho_floor)),
            ("rho_init", fmt_f64(self.rho_init)),
            ("pf_field0", fmt_f64(self.pf_field0)),
            ("pf_field_scale", fmt_f64(self.pf_field_scale)),
            ("pf_area", fmt_f64(self.pf_area)),
        ]
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

impl Configurable for SimParams {
    fn set_key(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "preset" => match value {
                "paper-power" | "paper_power" => *self = SimParams { seed: self.seed, ..SimParams::paper_power() },
                other => return Err(Error::Config { line: 0, reason: format!("unknown preset {other:?}") }),
            },
            "n_dipoles" => self.n_dipoles = parse_value(key, value)?,
            "prefactor_a" => self.prefactor_a = parse_value(key, value)?,
            "barrier_e" => self.barrier_e = parse_value(key, value)?,
            "temperature_t" => self.temperature_t = parse_value(key, value)?,
            "bias_v" => self.bias_v = parse_value(key, value)?,
            "r0" => self.r0 = parse_value(key, value)?,
            "length_l" => self.length_l = parse_value(key, value)?,
            "p_low" => self.p_low = parse_value(key, value)?,
            "p_high" => self.p_high = parse_value(key, value)?,
            "dt" => self.dt = parse_value(key, value)?,
            "n_steps" => self.n_steps = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "coupling" => {
                self.coupling = match value {
                    "ohmic" => Coupling::Ohmic,
                    "poole_frenkel" | "poole-frenkel" | "pf" => Coupling::PooleFrenkel,
                    other => {
                        return Err(Error::Config { line: 0, reason: format!("unknown coupling {other:?}") })
                    }
                }
            }
            "j0" => self.j0 = parse_value(key, value)?,
            "beta" => self.beta = parse_value(key, value)?,
            "rho_floor" => self.rho_floor = parse_value(key, value)?,
            "rho_init" => self.rho_init = parse_value(key, value)?,
            "pf_field0" => self.pf_field0 = parse_value(key, value)?,
            "pf_field_scale" => self.pf_field_scale = parse_value(key, value)?,
            "pf_area" => self.pf_area = parse_value(key, value)?,
            _ => return Err(Error::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// A preset replaces the whole parameter set, so it goes first and the
    /// remaining keys refine it.
    fn apply(&mut self, kv: &KeyValues) -> Result<()> {
        if let Some(p) = kv.get("preset") {
            self.set_key("preset", p)?;
        }
        for (k, v) in kv.iter().filter(|(k, _)| *k != "preset") {
            self.set_key(k, v)?;
        }
        Ok(())
    }
}

/// Arrhenius switching rate `A·exp(−E/(k·T))`, Hz.
pub fn switching_rate(params: &SimParams) -> f64 {
    params.prefactor_a * (-params.barrier_e / (BOLTZMANN_EV * params.temperature_t)).exp()
}

/// Two-state polarization of every dipole. `true` is the high state (P₂).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DipoleState {
    states: Vec<bool>,
    step_index: u64,
    n_high: usize,
}

impl DipoleState {
    pub fn new(states: Vec<bool>) -> Self {
        let n_high = states.iter().filter(|&&s| s).count();
        DipoleState { states, step_index: 0, n_high }
    }

    pub fn uniform(n: usize, high: bool) -> Self {
        DipoleState::new(vec![high; n])
    }

    /// Equilibrium start: one draw per dipole, high state when the top bit
    /// of the draw is set.
    pub fn initial(params: &SimParams, rng: &mut SimRng) -> Self {
        DipoleState::new((0..params.n_dipoles).map(|_| rng.next_u64() >> 63 == 1).collect())
    }

    pub fn states(&self) -> &[bool] {
        &self.states
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn high_count(&self) -> usize {
        self.n_high
    }

    /// Flips each dipole whose draw falls below `threshold`; exactly one draw
    /// per dipole, in index order.
    fn advance(&mut self, threshold: u64, rng: &mut SimRng) {
        let mut n_high = self.n_high as isize;
        for s in self.states.iter_mut() {
            if rng.next_u64() < threshold {
                *s = !*s;
                n_high += if *s { 1 } else { -1 };
            }
        }
        self.n_high = n_high as usize;
        self.step_index += 1;
    }
}

/// Probability mapped onto the `u64` draw range: a draw `d` flips when
/// `d < threshold`, which happens with probability `threshold / 2⁶⁴`.
fn flip_threshold(p: f64) -> u64 {
    if p <= 0.0 {
        0
    } else if p >= 1.0 {
        u64::MAX
    } else {
        (p * 18_446_744_073_709_551_616.0) as u64
    }
}

/// One Monte Carlo step. Each dipole flips independently with probability
/// `1 − exp(−λ·dt)`; `rng` advances by exactly `n_dipoles` draws.
pub fn step(state: &DipoleState, params: &SimParams, rng: &mut SimRng) -> DipoleState {
    debug_assert!(switching_rate(params) * params.dt <= MAX_RATE_DT);
    let mut next = state.clone();
    next.advance(flip_threshold(params.flip_probability()), rng);
    next
}

/// Mean polarization over the dipole ensemble.
pub fn net_polarization(state: &DipoleState, params: &SimParams) -> f64 {
    polarization_from_count(state.n_high, state.len(), params)
}

fn polarization_from_count(n_high: usize, n: usize, params: &SimParams) -> f64 {
    (n_high as f64 * params.p_high + (n - n_high) as f64 * params.p_low) / n as f64
}

/// Bound-charge change for a uniform polarization change, `−ΔP/L`.
pub fn bound_charge(delta_p: f64, params: &SimParams) -> f64 {
    -delta_p / params.length_l
}

/// `R₀ / max(|ρ_B|, ρ_floor)`.
pub fn resistance(rho_b: f64, params: &SimParams) -> f64 {
    params.r0 / rho_b.abs().max(params.rho_floor)
}

/// Poole–Frenkel current density `J₀·exp(β·√ε)`.
pub fn pf_current_density(field: f64, params: &SimParams) -> Result<f64> {
    if !(field >= 0.0) {
        return Err(Error::Domain(format!("Poole–Frenkel field must be non-negative, got {field}")));
    }
    Ok(params.j0 * (params.beta * field.sqrt()).exp())
}

fn current_at(rho_b: f64, params: &SimParams) -> f64 {
    match params.coupling {
        Coupling::Ohmic => params.bias_v / resistance(rho_b, params),
        Coupling::PooleFrenkel => {
            // Δρ_B = −Δε/L, so ε = ε₀ − κ·L·(ρ_B − ρ_init); validation keeps it ≥ 0.
            let field = params.pf_field0 - params.pf_field_scale * params.length_l * (rho_b - params.rho_init);
            let j = pf_current_density(field.max(0.0), params).expect("non-negative field");
            j * params.pf_area
        }
    }
}

/// Uniformly sampled current, amperes.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentTrace {
    pub dt: f64,
    pub samples: Vec<f64>,
    pub meta: Option<SimParams>,
}

impl CurrentTrace {
    pub fn new(dt: f64, samples: Vec<f64>) -> Self {
        CurrentTrace { dt, samples, meta: None }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// CSV with header `t_s,i_A`; row `k` is at `t = k·dt`. Values carry 17
    /// significant digits, so the text round-trips exactly.
    pub fn to_csv(&self) -> String {
        write_series_csv("t_s,i_A", self.dt, &self.samples)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let (dt, samples) = read_series_csv(text, "t_s,i_A")?;
        Ok(CurrentTrace::new(dt, samples))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        CurrentTrace::from_csv(&fs::read_to_string(path)?)
    }
}

pub(crate) fn write_series_csv(header: &str, dt: f64, samples: &[f64]) -> String {
    let mut s = String::with_capacity(samples.len() * 48 + header.len() + 1);
    s.push_str(header);
    s.push('\n');
    for (k, v) in samples.iter().enumerate() {
        let _ = writeln!(s, "{:.16e},{:.16e}", k as f64 * dt, v);
    }
    s
}

pub(crate) fn read_series_csv(text: &str, header: &str) -> Result<(f64, Vec<f64>)> {
    let mut lines = text.lines();
    let first = lines.next().ok_or_else(|| Error::Format("empty CSV".into()))?;
    if first.trim() != header {
        return Err(Error::Format(format!("expected header {header:?}, found {:?}", first.trim())));
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (t, v) = line
            .split_once(',')
            .ok_or_else(|| Error::Format(format!("row {}: expected two columns", i + 2)))?;
        let t: f64 = t.trim().parse().map_err(|_| Error::Format(format!("row {}: bad time {t:?}", i + 2)))?;
        let v: f64 = v.trim().parse().map_err(|_| Error::Format(format!("row {}: bad value {v:?}", i + 2)))?;
        if !v.is_finite() {
            return Err(Error::Format(format!("row {}: non-finite sample", i + 2)));
        }
        times.push(t);
        values.push(v);
    }
    if values.len() < 2 {
        return Err(Error::InsufficientData("a trace needs at least two rows to define dt".into()));
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if !(dt > 0.0) {
        return Err(Error::Format("time column must be increasing".into()));
    }
    for (k, t) in times.iter().enumerate() {
        let expect = times[0] + k as f64 * dt;
        if (t - expect).abs() > 1e-6 * dt.max(expect.abs() * 1e-9) + 1e-9 * dt * k as f64 {
            return Err(Error::Format(format!("row {}: non-uniform sampling", k + 2)));
        }
    }
    Ok((dt, values))
}

/// Runs the full Monte Carlo model. A pure function of `params`, seed
/// included: the same parameters always give a bit-identical trace.
pub fn simulate(params: &SimParams) -> Result<CurrentTrace> {
    params.validate()?;
    let mut rng = sim_rng(params.seed);
    let mut state = DipoleState::initial(params, &mut rng);
    let n = params.n_dipoles;
    let p_start = polarization_from_count(state.n_high, n, params);
    let threshold = flip_threshold(params.flip_probability());

    let mut samples = Vec::with_capacity(params.n_steps);
    for _ in 0..params.n_steps {
        state.advance(threshold, &mut rng);
        let p = polarization_from_count(state.n_high, n, params);
        // Sum of every per-step Δρ_B since step zero, telescoped.
        let rho_b = params.rho_init + bound_charge(p - p_start, params);
        samples.push(current_at(rho_b, params));
    }
    Ok(CurrentTrace { dt: params.dt, samples, meta: Some(params.clone()) })
}

/// Per-window integrated charge `Q_n`, coulombs.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeTrace {
    pub window: f64,
    pub values: Vec<f64>,
}

/// Integrates current over consecutive windows: `Q_n = Σ I_k·dt`. The window
/// must be a whole number of samples; a trailing partial window is dropped.
pub fn integrate_charge(trace: &CurrentTrace, window: f64) -> Result<ChargeTrace> {
    let per = samples_per_window(trace.dt, window)?;
    let values = trace
        .samples
        .chunks_exact(per)
        .map(|c| c.iter().map(|i| i * trace.dt).sum())
        .collect();
    Ok(ChargeTrace { window, values })
}

fn samples_per_window(dt: f64, window: f64) -> Result<usize> {
    if !(window > 0.0) || !(dt > 0.0) {
        return Err(Error::param("window", "must be positive"));
    }
    let ratio = window / dt;
    let k = ratio.round();
    if k < 1.0 || (ratio - k).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::param("window", format!("{window} s is not a whole multiple of dt = {dt} s")));
    }
    Ok(k as usize)
}
