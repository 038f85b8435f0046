use std::f64::consts::SQRT_2;

use super::{TestEntry, TestParams};
use crate::special::{erfc, gamma_q, normal_cdf};

const MIN_BITS: usize = 100;

fn imbalance(bits: &[u8]) -> i64 {
    bits.iter().map(|&b| 2 * i64::from(b) - 1).sum()
}

/// Monobit test: `erfc(|S_n|/√(2n))`.
pub fn frequency_p(bits: &[u8]) -> f64 {
    let n = bits.len() as f64;
    let s_obs = imbalance(bits).unsigned_abs() as f64 / n.sqrt();
    erfc(s_obs / SQRT_2)
}

pub fn frequency(bits: &[u8], params: &TestParams) -> TestEntry {
    const NAME: &str = "Frequency";
    if bits.len() < MIN_BITS {
        return TestEntry::not_applicable(NAME, format!("needs at least {MIN_BITS} bits"));
    }
    TestEntry::new(NAME, vec![frequency_p(bits)], params.significance)
}

/// Frequency within `m`-bit blocks; `Q(N/2, χ²/2)` with
/// `χ² = 4m Σ(π_i − ½)²`. Trailing bits short of a block are ignored.
pub fn block_frequency_p(bits: &[u8], m: usize) -> f64 {
    let blocks = bits.len() / m;
    assert!(blocks >= 1, "block frequency needs n ≥ M");
    let chi2: f64 = bits
        .chunks_exact(m)
        .map(|blk| {
            let ones = blk.iter().map(|&b| i64::from(b)).sum::<i64>();
            // π − ½ as (2·ones − m)/(2m), symmetric under complement
            let d = (2 * ones - m as i64) as f64 / (2 * m) as f64;
            d * d
        })
        .sum::<f64>()
        * 4.0
        * m as f64;
    gamma_q(blocks as f64 / 2.0, chi2 / 2.0)
}

pub fn block_frequency(bits: &[u8], params: &TestParams) -> TestEntry {
    const NAME: &str = "Block frequency";
    let m = params.block_length;
    if bits.len() < MIN_BITS {
        return TestEntry::not_applicable(NAME, format!("needs at least {MIN_BITS} bits"));
    }
    if bits.len() < m {
        return TestEntry::not_applicable(NAME, format!("stream shorter than block length {m}"));
    }
    TestEntry::new(NAME, vec![block_frequency_p(bits, m)], params.significance)
}

/// Runs test. `None` when the monobit prerequisite `|π − ½| < 2/√n` fails.
pub fn runs_p(bits: &[u8]) -> Option<f64> {
    let n = bits.len() as f64;
    let pi = bits.iter().map(|&b| u64::from(b)).sum::<u64>() as f64 / n;
    if (pi - 0.5).abs() >= 2.0 / n.sqrt() {
        return None;
    }
    let v_obs = 1 + bits.windows(2).filter(|w| w[0] != w[1]).count();
    let num = (v_obs as f64 - 2.0 * n * pi * (1.0 - pi)).abs();
    let den = 2.0 * (2.0 * n).sqrt() * pi * (1.0 - pi);
    Some(erfc(num / den))
}

pub fn runs(bits: &[u8], params: &TestParams) -> TestEntry {
    const NAME: &str = "Runs";
    if bits.len() < MIN_BITS {
        return TestEntry::not_applicable(NAME, format!("needs at least {MIN_BITS} bits"));
    }
    match runs_p(bits) {
        Some(p) => TestEntry::new(NAME, vec![p], params.significance),
        None => TestEntry::not_applicable(NAME, "frequency prerequisite |π − ½| < 2/√n not met"),
    }
}

/// Block size and category table for the longest-run-of-ones test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LongestRunTable {
    M8,
    M128,
    M10000,
}

impl LongestRunTable {
    pub fn for_length(n: usize) -> Option<Self> {
        match n {
            0..=127 => None,
            128..=6271 => Some(LongestRunTable::M8),
            6272..=749_999 => Some(LongestRunTable::M128),
            _ => Some(LongestRunTable::M10000),
        }
    }

    pub fn block_len(self) -> usize {
        match self {
            LongestRunTable::M8 => 8,
            LongestRunTable::M128 => 128,
            LongestRunTable::M10000 => 10_000,
        }
    }

    /// Smallest and largest category run lengths; runs outside are clamped.
    fn bounds(self) -> (usize, usize) {
        match self {
            LongestRunTable::M8 => (1, 4),
            LongestRunTable::M128 => (4, 9),
            LongestRunTable::M10000 => (10, 16),
        }
    }

    fn probabilities(self) -> &'static [f64] {
        match self {
            LongestRunTable::M8 => &[0.2148, 0.3672, 0.2305, 0.1875],
            LongestRunTable::M128 => &[0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124],
            LongestRunTable::M10000 => &[0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727],
        }
    }

    pub fn category(self, longest: usize) -> usize {
        let (lo, hi) = self.bounds();
        longest.clamp(lo, hi) - lo
    }
}

fn longest_run_in(block: &[u8]) -> usize {
    let (mut best, mut cur) = (0, 0);
    for &b in block {
        if b == 1 {
            cur += 1;
            best = best.max(cur);
        } else {
            cur = 0;
        }
    }
    best
}

/// Longest run of ones in blocks: `Q(K/2, χ²/2)` over the table categories.
pub fn longest_run_p(bits: &[u8], table: LongestRunTable) -> f64 {
    let m = table.block_len();
    let probs = table.probabilities();
    let blocks = bits.len() / m;
    assert!(blocks >= 1, "longest run needs at least one block");
    let mut counts = vec![0u64; probs.len()];
    for blk in bits.chunks_exact(m) {
        counts[table.category(longest_run_in(blk))] += 1;
    }
    let nb = blocks as f64;
    let chi2: f64 = counts
        .iter()
        .zip(probs)
        .map(|(&v, &pi)| {
            let e = nb * pi;
            (v as f64 - e).powi(2) / e
        })
        .sum();
    gamma_q((probs.len() - 1) as f64 / 2.0, chi2 / 2.0)
}

pub fn longest_run(bits: &[u8], params: &TestParams) -> TestEntry {
    const NAME: &str = "Longest run";
    match LongestRunTable::for_length(bits.len()) {
        Some(t) => TestEntry::new(NAME, vec![longest_run_p(bits, t)], params.significance)
            .with_note(format!("M = {}", t.block_len())),
        None => TestEntry::not_applicable(NAME, "needs at least 128 bits"),
    }
}

/// Cumulative sums; `forward = false` walks the sequence from the end.
pub fn cumulative_sums_p(bits: &[u8], forward: bool) -> f64 {
    let n = bits.len() as i64;
    let mut s = 0i64;
    let mut z = 0i64;
    let mut visit = |b: u8| {
        s += 2 * i64::from(b) - 1;
        z = z.max(s.abs());
    };
    if forward {
        bits.iter().for_each(|&b| visit(b));
    } else {
        bits.iter().rev().for_each(|&b| visit(b));
    }
    let sqrt_n = (n as f64).sqrt();
    let zf = z as f64;
    // Summation limits follow the reference code's integer arithmetic.
    let q = n / z;
    let mut sum1 = 0.0;
    for k in ((-q + 1) / 4)..=((q - 1) / 4) {
        let k = k as f64;
        sum1 += normal_cdf((4.0 * k + 1.0) * zf / sqrt_n) - normal_cdf((4.0 * k - 1.0) * zf / sqrt_n);
    }
    let mut sum2 = 0.0;
    for k in ((-q - 3) / 4)..=((q - 1) / 4) {
        let k = k as f64;
        sum2 += normal_cdf((4.0 * k + 3.0) * zf / sqrt_n) - normal_cdf((4.0 * k + 1.0) * zf / sqrt_n);
    }
    (1.0 - sum1 + sum2).clamp(0.0, 1.0)
}

pub fn cumulative_sums(bits: &[u8], params: &TestParams) -> TestEntry {
    const NAME: &str = "Cumulative sums";
    if bits.len() < MIN_BITS {
        return TestEntry::not_applicable(NAME, format!("needs at least {MIN_BITS} bits"));
    }
    TestEntry::new(
        NAME,
        vec![cumulative_sums_p(bits, true), cumulative_sums_p(bits, false)],
        params.significance,
    )
    .with_note("forward, backward")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ascii(s: &str) -> Vec<u8> {
        s.bytes().filter(|c| *c == b'0' || *c == b'1').map(|c| c - b'0').collect()
    }

    fn params() -> TestParams {
        TestParams::default()
    }

    #[test]
    fn frequency_balanced_and_extreme() {
        let alt: Vec<u8> = (0..1001).map(|i| (i % 2) as u8).collect();
        let e = frequency(&alt, &params());
        assert!(e.pass && e.p_values[0] > 0.97);
        let zeros = vec![0u8; 1000];
        let e = frequency(&zeros, &params());
        assert!(!e.pass && e.p_values[0] < 1e-10);
        assert!(!frequency(&zeros[..50], &params()).applicable);
    }

    #[test]
    fn block_frequency_half_blocks() {
        let bits: Vec<u8> = (0..200).map(|i| u8::from(i % 4 < 2)).collect();
        assert_eq!(block_frequency_p(&bits, 20), 1.0);
        let p = TestParams { block_length: 400, ..params() };
        assert!(!block_frequency(&bits, &p).applicable);
    }

    #[test]
    fn runs_gating_and_alternation() {
        let alt: Vec<u8> = (0..1000).map(|i| (i % 2) as u8).collect();
        let e = runs(&alt, &params());
        assert!(e.applicable && !e.pass);
        let skewed: Vec<u8> = (0..1000).map(|i| u8::from(i % 10 != 0)).collect();
        assert!(!runs(&skewed, &params()).applicable);
    }

    #[test]
    fn longest_run_categories() {
        let t = LongestRunTable::M8;
        assert_eq!(t.category(0), 0);
        assert_eq!(t.category(1), 0);
        assert_eq!(t.category(4), 3);
        assert_eq!(t.category(8), 3);
        assert_eq!(LongestRunTable::M128.category(2), 0);
        assert_eq!(LongestRunTable::M10000.category(40), 6);
        assert_eq!(LongestRunTable::for_length(127), None);
        assert_eq!(LongestRunTable::for_length(6272), Some(LongestRunTable::M128));
        assert_eq!(LongestRunTable::for_length(750_000), Some(LongestRunTable::M10000));
    }

    #[test]
    fn longest_run_all_ones() {
        let ones = vec![1u8; 128];
        let e = longest_run(&ones, &params());
        assert!(e.p_values[0] < 1e-10 && !e.pass);
    }

    #[test]
    fn cusum_all_ones_and_reversal() {
        let ones = vec![1u8; 500];
        assert!(cumulative_sums_p(&ones, true) < 1e-10);
        let bits = ascii("1100100100001111110110101010001000100001011010001100001000110100110001001100011001100010100010111000");
        let rev: Vec<u8> = bits.iter().rev().copied().collect();
        assert_eq!(cumulative_sums_p(&bits, true), cumulative_sums_p(&rev, false));
        assert_eq!(cumulative_sums_p(&bits, false), cumulative_sums_p(&rev, true));
    }

    #[test]
    fn complement_invariance() {
        let bits = ascii("1100100100001111110110101010001000100001011010001100001000110100110001001100011001100010100010111000");
        let comp: Vec<u8> = bits.iter().map(|b| 1 - b).collect();
        assert_eq!(frequency_p(&bits), frequency_p(&comp));
        assert_eq!(block_frequency_p(&bits, 10), block_frequency_p(&comp, 10));
        assert_eq!(cumulative_sums_p(&bits, true), cumulative_sums_p(&comp, true));
        let (a, b) = (runs_p(&bits).unwrap(), runs_p(&comp).unwrap());
        assert!((a - b).abs() < 1e-14);
    }
}
