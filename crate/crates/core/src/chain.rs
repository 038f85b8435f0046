//! Ideal digital model of the analog front end: transimpedance conversion,
//! a first-order high-pass filter and a Schmitt comparator emitting bits.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bits::BitStream;
use crate::config::{parse_value, Configurable};
use crate::error::{Error, Result};
use crate::sim::{read_series_csv, write_series_csv, CurrentTrace};

/// Fraction of the filtered trace used to calibrate the default threshold.
pub const CALIBRATION_FRACTION: f64 = 0.1;
/// Filtered samples per emitted bit. The dipole ensemble stays correlated
/// for tens of steps at the default rate, so bits are spaced well apart.
pub const DEFAULT_DECIMATION: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    /// Transimpedance gain, V/A.
    pub gain: f64,
    /// High-pass cutoff in Hz; `None` uses `1/(20·dt)` of the trace.
    pub cutoff_hz: Option<f64>,
    /// Comparator reference in volts; `None` uses the median of the first
    /// 10% of the filtered samples.
    pub threshold: Option<f64>,
    pub hysteresis: f64,
    /// Emit one bit every this many filtered samples.
    pub decimation: usize,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig { gain: 1.0e6, cutoff_hz: None, threshold: None, hysteresis: 0.0, decimation: DEFAULT_DECIMATION }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gain > 0.0) || !self.gain.is_finite() {
            return Err(Error::param("gain", "must be positive"));
        }
        if !(self.hysteresis >= 0.0) {
            return Err(Error::param("hysteresis", "must be non-negative"));
        }
        if self.decimation == 0 {
            return Err(Error::param("decimation", "must be at least 1"));
        }
        Ok(())
    }

    /// Cutoff for a trace sampled every `dt`, checked against Nyquist.
    pub fn cutoff_for(&self, dt: f64) -> Result<f64> {
        let fc = self.cutoff_hz.unwrap_or(1.0 / (20.0 * dt));
        if !(fc > 0.0) || fc >= 1.0 / (2.0 * dt) {
            return Err(Error::param("cutoff_hz", format!("{fc} Hz is outside (0, {}) Hz", 1.0 / (2.0 * dt))));
        }
        Ok(fc)
    }

    pub fn key_values(&self) -> Vec<(&'static str, String)> {
        vec![
            ("gain", format!("{:e}", self.gain)),
            ("cutoff_hz", self.cutoff_hz.map_or("auto".into(), |v| format!("{v:e}"))),
            ("threshold", self.threshold.map_or("auto".into(), |v| format!("{v:e}"))),
            ("hysteresis", format!("{:e}", self.hysteresis)),
            ("decimation", self.decimation.to_string()),
        ]
    }
}

impl Configurable for ChainConfig {
    fn set_key(&mut self, key: &str, value: &str) -> Result<()> {
        let auto = value == "auto";
        match key {
            "gain" => self.gain = parse_value(key, value)?,
            "cutoff_hz" => self.cutoff_hz = if auto { None } else { Some(parse_value(key, value)?) },
            "threshold" => self.threshold = if auto { None } else { Some(parse_value(key, value)?) },
            "hysteresis" => self.hysteresis = parse_value(key, value)?,
            "decimation" => self.decimation = parse_value(key, value)?,
            _ => return Err(Error::UnknownKey(key.to_string())),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    /// Port 1: transimpedance output.
    Converted,
    /// Port 2: high-pass output.
    Filtered,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoltageTrace {
    pub dt: f64,
    pub samples: Vec<f64>,
    pub stage: Stage,
}

impl VoltageTrace {
    pub fn to_csv(&self) -> String {
        write_series_csv("t_s,v_V", self.dt, &self.samples)
    }

    pub fn from_csv(text: &str, stage: Stage) -> Result<Self> {
        let (dt, samples) = read_series_csv(text, "t_s,v_V")?;
        Ok(VoltageTrace { dt, samples, stage })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// `v[n] = gain · i[n]`.
pub fn iv_convert(trace: &CurrentTrace, cfg: &ChainConfig) -> Result<VoltageTrace> {
    cfg.validate()?;
    Ok(VoltageTrace {
        dt: trace.dt,
        samples: trace.samples.iter().map(|i| cfg.gain * i).collect(),
        stage: Stage::Converted,
    })
}

/// Coefficient of the recursive high-pass, `1/(1 + 2π·fc·dt)`.
pub fn high_pass_coefficient(fc: f64, dt: f64) -> f64 {
    1.0 / (1.0 + 2.0 * PI * fc * dt)
}

/// First-order high-pass `y[n] = a·(y[n−1] + x[n] − x[n−1])`, `y[0] = 0`.
pub fn high_pass(trace: &VoltageTrace, cfg: &ChainConfig) -> Result<VoltageTrace> {
    if trace.stage != Stage::Converted {
        return Err(Error::Domain("high-pass expects a converted (port 1) trace".into()));
    }
    let a = high_pass_coefficient(cfg.cutoff_for(trace.dt)?, trace.dt);
    Ok(VoltageTrace { dt: trace.dt, samples: high_pass_samples(&trace.samples, a), stage: Stage::Filtered })
}

pub(crate) fn high_pass_samples(x: &[f64], a: f64) -> Vec<f64> {
    let mut y = Vec::with_capacity(x.len());
    let mut prev_x = match x.first() {
        Some(&v) => v,
        None => return y,
    };
    let mut prev_y = 0.0;
    y.push(0.0);
    for &xn in &x[1..] {
        prev_y = a * (prev_y + xn - prev_x);
        prev_x = xn;
        y.push(prev_y);
    }
    y
}

/// Median of the leading calibration segment (at least one sample).
pub fn calibration_threshold(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let n = ((samples.len() as f64 * CALIBRATION_FRACTION).ceil() as usize).clamp(1, samples.len());
    median(&samples[..n])
}

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Schmitt comparator. The state goes high above `θ + h`, low below `θ − h`
/// and holds in between; it starts low. The state is sampled after every
/// `decimation`-th input sample.
pub fn comparator(trace: &VoltageTrace, cfg: &ChainConfig) -> Result<BitStream> {
    if trace.stage != Stage::Filtered {
        return Err(Error::Domain("comparator expects a filtered (port 2) trace".into()));
    }
    cfg.validate()?;
    let theta = cfg.threshold.unwrap_or_else(|| calibration_threshold(&trace.samples));
    let (hi, lo) = (theta + cfg.hysteresis, theta - cfg.hysteresis);
    let mut state = false;
    let mut out = BitStream::with_capacity(trace.samples.len() / cfg.decimation);
    for (i, &v) in trace.samples.iter().enumerate() {
        if v > hi {
            state = true;
        } else if v < lo {
            state = false;
        }
        if (i + 1) % cfg.decimation == 0 {
            out.push(state);
        }
    }
    Ok(out)
}

/// The three front-end outputs: port 1, port 2 and the port-3 bits.
#[derive(Debug, Clone)]
pub struct ChainOutput {
    pub converted: VoltageTrace,
    pub filtered: VoltageTrace,
    pub bits: BitStream,
}

pub fn run_chain(trace: &CurrentTrace, cfg: &ChainConfig) -> Result<ChainOutput> {
    let converted = iv_convert(trace, cfg)?;
    let filtered = high_pass(&converted, cfg)?;
    let bits = comparator(&filtered, cfg)?;
    Ok(ChainOutput { converted, filtered, bits })
}
