//! Slope histograms, Gaussian fits, weighted time-lag maps and bit balance.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bits::BitStream;
use crate::config::{parse_value, Configurable};
use crate::error::{Error, Result};
use crate::sim::ChargeTrace;

/// Densities below this are clamped before taking the log.
pub const TL_DENSITY_FLOOR: f64 = 1e-300;
/// Suggested lower clip for rendering TL values.
pub const TL_DISPLAY_FLOOR: f64 = -12.0;
pub const DEFAULT_GRID_SIZE: usize = 256;
/// Default kernel width as a fraction of the charge range.
pub const DEFAULT_ALPHA_FRACTION: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeSeries {
    pub dt: f64,
    pub values: Vec<f64>,
}

/// Forward differences divided by the sample interval.
pub fn slope_series(samples: &[f64], dt: f64) -> Result<SlopeSeries> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData(format!("slopes need at least 2 samples, have {}", samples.len())));
    }
    if !(dt > 0.0) {
        return Err(Error::param("dt", "must be positive"));
    }
    let values = samples.windows(2).map(|w| (w[1] - w[0]) / dt).collect();
    Ok(SlopeSeries { dt, values })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum BinRule {
    /// Freedman–Diaconis width, snapped to the value lattice when the data
    /// are quantized.
    #[default]
    FreedmanDiaconis,
    Count(usize),
    Width(f64),
}

impl std::str::FromStr for BinRule {
    type Err = Error;

    /// `fd`, `count:N` or `width:W`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Format(format!("bin rule {s:?}: expected fd, count:N or width:W"));
        match s.split_once(':') {
            None if s == "fd" => Ok(BinRule::FreedmanDiaconis),
            Some(("count", n)) => n.parse().ok().filter(|&n| n > 0).map(BinRule::Count).ok_or_else(bad),
            Some(("width", w)) => w.parse().ok().filter(|&w: &f64| w > 0.0 && w.is_finite()).map(BinRule::Width).ok_or_else(bad),
            _ => Err(bad()),
        }
    }
}

impl std::fmt::Display for BinRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BinRule::FreedmanDiaconis => f.write_str("fd"),
            BinRule::Count(n) => write!(f, "count:{n}"),
            BinRule::Width(w) => write!(f, "width:{w:e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Bins `values` on explicit ascending edges; values outside are dropped
    /// and the last bin is closed on the right.
    pub fn with_edges(values: &[f64], bin_edges: Vec<f64>) -> Result<Self> {
        if bin_edges.len() < 2 || bin_edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("bin_edges", "need at least two strictly ascending edges"));
        }
        let nb = bin_edges.len() - 1;
        let (lo, hi) = (bin_edges[0], bin_edges[nb]);
        let mut counts = vec![0u64; nb];
        for &v in values {
            if !(v >= lo && v <= hi) {
                continue;
            }
            let i = bin_edges.partition_point(|&e| e <= v).saturating_sub(1).min(nb - 1);
            counts[i] += 1;
        }
        Ok(Histogram { bin_edges, counts })
    }

    pub fn build(values: &[f64], rule: BinRule) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientData("cannot bin an empty series".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite value in histogram input".into()));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
        let range = hi - lo;
        if range == 0.0 {
            let half = if lo == 0.0 { 0.5 } else { 0.5 * lo.abs() };
            return Histogram::with_edges(values, vec![lo - half, lo + half]);
        }
        let lattice = lattice_quantum(&sorted);
        let raw_width = match rule {
            BinRule::Width(w) => w,
            BinRule::Count(n) => range / n as f64,
            BinRule::FreedmanDiaconis => {
                let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
                let h = 2.0 * iqr / (sorted.len() as f64).cbrt();
                if h > 0.0 {
                    h
                } else {
                    range / (sorted.len() as f64).log2().ceil().max(1.0)
                }
            }
        };
        let edges = match (rule, lattice) {
            (BinRule::FreedmanDiaconis, Some(q)) => {
                let width = (raw_width / q).round().max(1.0) * q;
                let start = lo - 0.5 * q;
                let nb = ((hi - start) / width).floor() as usize + 1;
                (0..=nb).map(|i| start + i as f64 * width).collect()
            }
            _ => {
                let nb = ((range / raw_width).ceil() as usize).max(1);
                let width = range / nb as f64;
                let mut e: Vec<f64> = (0..=nb).map(|i| lo + i as f64 * width).collect();
                e[nb] = hi;
                e
            }
        };
        Histogram::with_edges(values, edges)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn non_empty_bins(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

/// Type-7 quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let i = h.floor() as usize;
    let frac = h - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

/// Spacing `q` such that every value is `min + k·q` for integer `k`, when
/// the data are quantized that way.
fn lattice_quantum(sorted: &[f64]) -> Option<f64> {
    let lo = sorted[0];
    let hi = sorted[sorted.len() - 1];
    let scale = lo.abs().max(hi.abs());
    let tiny = 1e-9 * scale;
    let mut distinct: Vec<f64> = Vec::new();
    for &v in sorted {
        if distinct.last().map_or(true, |&d| v - d > tiny) {
            distinct.push(v);
        }
    }
    if distinct.len() < 3 || distinct.len() * 4 > sorted.len() {
        return None;
    }
    let q = distinct.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let on_lattice = distinct.iter().all(|&v| {
        let k = (v - lo) / q;
        (k - k.round()).abs() < 1e-6
    });
    on_lattice.then_some(q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub mu: f64,
    pub sigma: f64,
    pub amplitude: f64,
    pub r_squared: f64,
}

fn gauss(x: f64, a: f64, mu: f64, sigma: f64) -> f64 {
    a * (-(x - mu).powi(2) / (2.0 * sigma * sigma)).exp()
}

/// Levenberg–Marquardt fit of `A·exp(−(x−μ)²/(2σ²))` to bin counts at bin
/// centers, started from the histogram's moments. `r²` is on counts.
pub fn gaussian_fit(hist: &Histogram) -> Result<GaussianFit> {
    let nonempty = hist.non_empty_bins();
    if nonempty == 1 {
        return Err(Error::Domain("all histogram mass lies in one bin".into()));
    }
    if nonempty < 5 {
        return Err(Error::InsufficientData(format!("Gaussian fit needs 5 non-empty bins, have {nonempty}")));
    }
    let xs = hist.centers();
    let ys: Vec<f64> = hist.counts.iter().map(|&c| c as f64).collect();
    let total: f64 = ys.iter().sum();
    let mean = xs.iter().zip(&ys).map(|(x, y)| x * y).sum::<f64>() / total;
    let var = xs.iter().zip(&ys).map(|(x, y)| y * (x - mean).powi(2)).sum::<f64>() / total;
    let width = hist.bin_edges[1] - hist.bin_edges[0];
    let mut p = [0.0, mean, var.sqrt().max(0.5 * width)];
    p[0] = total * width / (p[2] * (2.0 * PI).sqrt());

    let sse = |p: &[f64; 3]| -> f64 { xs.iter().zip(&ys).map(|(&x, &y)| (y - gauss(x, p[0], p[1], p[2])).powi(2)).sum() };
    let mut cost = sse(&p);
    let mut lambda = 1e-3;
    for _ in 0..500 {
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for (&x, &y) in xs.iter().zip(&ys) {
            let (a, mu, s) = (p[0], p[1], p[2]);
            let e = (-(x - mu).powi(2) / (2.0 * s * s)).exp();
            let j = [e, a * e * (x - mu) / (s * s), a * e * (x - mu).powi(2) / (s * s * s)];
            let r = y - a * e;
            for i in 0..3 {
                jtr[i] += j[i] * r;
                for k in 0..3 {
                    jtj[i][k] += j[i] * j[k];
                }
            }
        }
        let mut improved = false;
        while lambda < 1e12 {
            let mut m = jtj;
            for (i, row) in m.iter_mut().enumerate() {
                row[i] += lambda * jtj[i][i].max(1e-300);
            }
            let Some(delta) = solve3(m, jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial = [p[0] + delta[0], p[1] + delta[1], (p[2] + delta[2]).abs()];
            let c = sse(&trial);
            if c.is_finite() && c <= cost && trial[2] > 0.0 {
                let rel = (cost - c) / cost.max(1e-300);
                p = trial;
                cost = c;
                lambda = (lambda / 10.0).max(1e-12);
                improved = rel > 1e-14;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let ss_tot: f64 = ys.iter().map(|y| (y - total / ys.len() as f64).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { (1.0 - cost / ss_tot).clamp(0.0, 1.0) } else { 0.0 };
    Ok(GaussianFit { mu: p[1], sigma: p[2], amplitude: p[0], r_squared })
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Histogram plus fit, the JSON export document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramReport {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub mu: f64,
    pub sigma: f64,
    pub amplitude: f64,
    pub r_squared: f64,
}

impl HistogramReport {
    pub fn new(hist: &Histogram, fit: &GaussianFit) -> Self {
        HistogramReport {
            bin_edges: hist.bin_edges.clone(),
            counts: hist.counts.clone(),
            mu: fit.mu,
            sigma: fit.sigma,
            amplitude: fit.amplitude,
            r_squared: fit.r_squared,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

/// Weighted time-lag map over `(Q_n, Q_{n+1})`, as log₁₀ of the normalized
/// kernel density. `values[j][i]` is the cell at `x` bin `i`, `y` bin `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TlGrid {
    pub grid_size: usize,
    pub x_edges: Vec<f64>,
    pub y_edges: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub alpha: f64,
    pub k_norm: f64,
    pub q_min: f64,
    pub q_max: f64,
}

/// Two percent of the value range; falls back to the magnitude, then 1.
pub fn default_alpha(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    if range > 0.0 {
        DEFAULT_ALPHA_FRACTION * range
    } else if lo != 0.0 {
        DEFAULT_ALPHA_FRACTION * lo.abs()
    } else {
        1.0
    }
}

/// Evaluates the Gaussian-kernel density of consecutive pairs at the cell
/// centers of a grid spanning `[min Q − 3α, max Q + 3α]` on both axes.
pub fn time_lag(charge: &ChargeTrace, grid_size: usize, alpha: f64) -> Result<TlGrid> {
    let q = &charge.values;
    if q.len() < 2 {
        return Err(Error::InsufficientData(format!("time-lag map needs 2 charge values, have {}", q.len())));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::param("alpha", "must be positive"));
    }
    if grid_size == 0 {
        return Err(Error::param("grid_size", "must be ≥ 1"));
    }
    if q.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite charge value".into()));
    }
    let q_min = q.iter().copied().fold(f64::INFINITY, f64::min);
    let q_max = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = q_min - 3.0 * alpha;
    let step = (q_max - q_min + 6.0 * alpha) / grid_size as f64;
    let edges: Vec<f64> = (0..=grid_size).map(|i| lo + i as f64 * step).collect();
    let centers: Vec<f64> = (0..grid_size).map(|i| lo + (i as f64 + 0.5) * step).collect();

    // identical pairs share one kernel evaluation
    let mut pairs: BTreeMap<(u64, u64), u64> = BTreeMap::new();
    for w in q.windows(2) {
        *pairs.entry((w[0].to_bits(), w[1].to_bits())).or_default() += 1;
    }
    let mut rows: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    let kernel = |c: f64| -> Vec<f64> { centers.iter().map(|&x| (-(c - x).powi(2) / (2.0 * alpha * alpha)).exp()).collect() };
    for (&(xb, yb), &mult) in &pairs {
        let gy = kernel(f64::from_bits(yb));
        let row = rows.entry(xb).or_insert_with(|| vec![0.0; grid_size]);
        for (r, g) in row.iter_mut().zip(gy) {
            *r += mult as f64 * g;
        }
    }
    let norm = 1.0 / (2.0 * PI * alpha * alpha);
    let mut density = vec![vec![0.0; grid_size]; grid_size];
    for (&xb, row) in &rows {
        let gx = kernel(f64::from_bits(xb));
        for (i, &gxi) in gx.iter().enumerate() {
            if gxi == 0.0 {
                continue;
            }
            for (j, &r) in row.iter().enumerate() {
                density[j][i] += gxi * r;
            }
        }
    }
    let mut d_max = 0.0f64;
    for row in density.iter_mut() {
        for d in row.iter_mut() {
            *d = (*d * norm).max(TL_DENSITY_FLOOR);
            d_max = d_max.max(*d);
        }
    }
    let k_norm = 1.0 / d_max;
    let values = density.iter().map(|row| row.iter().map(|&d| (k_norm * d).log10().min(0.0)).collect()).collect();
    Ok(TlGrid { grid_size, x_edges: edges.clone(), y_edges: edges, values, alpha, k_norm, q_min, q_max })
}

impl TlGrid {
    pub fn x_centers(&self) -> Vec<f64> {
        self.x_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn y_centers(&self) -> Vec<f64> {
        self.y_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Among cells with `TL > level`, the fraction whose centers satisfy
    /// `|x − y| < band · (max Q − min Q)`.
    pub fn diagonal_fraction(&self, level: f64, band: f64) -> f64 {
        let width = band * (self.q_max - self.q_min);
        let (xc, yc) = (self.x_centers(), self.y_centers());
        let (mut above, mut inside) = (0usize, 0usize);
        for (j, row) in self.values.iter().enumerate() {
            for (i, &v) in row.iter().enumerate() {
                if v > level {
                    above += 1;
                    if (xc[i] - yc[j]).abs() < width {
                        inside += 1;
                    }
                }
            }
        }
        if above == 0 {
            0.0
        } else {
            inside as f64 / above as f64
        }
    }

    /// One row per `y` bin, one column per `x` bin.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for row in &self.values {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.12e}")).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }

    pub fn metadata_json(&self) -> String {
        serde_json::json!({
            "grid_size": self.grid_size,
            "x_edges": self.x_edges,
            "y_edges": self.y_edges,
            "alpha": self.alpha,
            "k_norm": self.k_norm,
            "q_min": self.q_min,
            "q_max": self.q_max,
            "density_floor": TL_DENSITY_FLOOR,
            "display_floor": TL_DISPLAY_FLOOR,
            "layout": "rows are y bins, columns are x bins",
        })
        .to_string()
    }

    /// Writes the matrix to `path` and metadata to `path` + `.meta.json`.
    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv())?;
        let mut meta = path.as_os_str().to_owned();
        meta.push(".meta.json");
        fs::write(meta, self.metadata_json())?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BitBalance {
    pub ones: usize,
    pub n_bits: usize,
    pub ones_fraction: f64,
    pub zeros_fraction: f64,
}

pub fn bit_balance(bits: &BitStream) -> Result<BitBalance> {
    if bits.is_empty() {
        return Err(Error::InsufficientData("bit balance of an empty stream".into()));
    }
    let ones = bits.count_ones();
    let n = bits.len();
    Ok(BitBalance {
        ones,
        n_bits: n,
        ones_fraction: ones as f64 / n as f64,
        zeros_fraction: (n - ones) as f64 / n as f64,
    })
}

/// Analysis knobs, configurable under `tl.`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub grid_size: usize,
    /// `None`: two percent of the charge range.
    pub alpha: Option<f64>,
    /// Charge integration window, seconds.
    pub window: f64,
    pub bins: BinRule,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            grid_size: DEFAULT_GRID_SIZE,
            alpha: None,
            window: crate::sim::DEFAULT_CHARGE_WINDOW,
            bins: BinRule::FreedmanDiaconis,
        }
    }
}

impl AnalysisConfig {
    pub fn key_values(&self) -> Vec<(&'static str, String)> {
        vec![
            ("grid_size", self.grid_size.to_string()),
            ("alpha", self.alpha.map_or("auto".into(), |a| format!("{a:e}"))),
            ("window", format!("{:e}", self.window)),
            ("bins", self.bins.to_string()),
        ]
    }
}

impl Configurable for AnalysisConfig {
    fn set_key(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "grid_size" => self.grid_size = parse_value(key, value)?,
            "alpha" => self.alpha = if value == "auto" { None } else { Some(parse_value(key, value)?) },
            "window" => self.window = parse_value(key, value)?,
            "bins" => self.bins = value.parse()?,
            _ => return Err(Error::UnknownKey(key.to_string())),
        }
        Ok(())
    }
}
