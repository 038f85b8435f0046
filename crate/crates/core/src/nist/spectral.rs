use std::f64::consts::SQRT_2;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::{TestEntry, TestParams};
use crate::special::erfc;

const MIN_BITS: usize = 1000;

/// Magnitudes `|DFT(2b − 1)|` of the first `n/2` frequency bins.
pub fn half_spectrum(bits: &[u8]) -> Vec<f64> {
    let n = bits.len();
    let mut buf: Vec<Complex<f64>> = bits.iter().map(|&b| Complex::new(2.0 * f64::from(b) - 1.0, 0.0)).collect();
    if n > 0 {
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    }
    buf.truncate(n / 2);
    buf.iter().map(|c| c.norm()).collect()
}

/// Normalized difference `d` between the observed and expected number of
/// peaks below the 95% threshold `√(n·ln(1/0.05))`.
pub fn spectral_statistic(bits: &[u8]) -> f64 {
    let n = bits.len() as f64;
    let threshold = (n * (1.0f64 / 0.05).ln()).sqrt();
    let below = half_spectrum(bits).iter().filter(|&&m| m < threshold).count() as f64;
    let expected = 0.95 * n / 2.0;
    (below - expected) / (n * 0.95 * 0.05 / 4.0).sqrt()
}

pub fn spectral_p(bits: &[u8]) -> f64 {
    erfc(spectral_statistic(bits).abs() / SQRT_2)
}

pub fn spectral(bits: &[u8], params: &TestParams) -> TestEntry {
    const NAME: &str = "FFT";
    if bits.len() < MIN_BITS {
        return TestEntry::not_applicable(NAME, format!("needs at least {MIN_BITS} bits"));
    }
    TestEntry::new(NAME, vec![spectral_p(bits)], params.significance)
}
