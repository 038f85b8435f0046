use super::{TestEntry, TestParams};
use crate::special::gamma_q;

/// Counts of every overlapping `m`-bit pattern with wraparound; `n` windows.
fn pattern_counts(bits: &[u8], m: usize) -> Vec<u64> {
    let mut counts = vec![0u64; 1 << m];
    if m == 0 {
        counts[0] = bits.len() as u64;
        return counts;
    }
    let n = bits.len();
    let mask = (1usize << m) - 1;
    let mut v = 0usize;
    // prime with the first m−1 bits, then slide over the wrapped sequence
    for &b in &bits[..m - 1] {
        v = (v << 1) | usize::from(b);
    }
    for i in 0..n {
        let b = bits[(i + m - 1) % n];
        v = ((v << 1) | usize::from(b)) & mask;
        counts[v] += 1;
    }
    counts
}

/// `ψ²_m = (2^m/n)·Σν² − n`; zero for `m ≤ 0`.
pub fn psi_squared(bits: &[u8], m: isize) -> f64 {
    if m <= 0 {
        return 0.0;
    }
    let m = m as usize;
    let n = bits.len() as f64;
    let sum_sq: u64 = pattern_counts(bits, m).iter().map(|c| c * c).sum();
    (1u64 << m) as f64 / n * sum_sq as f64 - n
}

/// Serial test p-values from `∇ψ²_m` and `∇²ψ²_m`.
pub fn serial_p(bits: &[u8], m: usize) -> [f64; 2] {
    assert!(m >= 1 && m <= bits.len());
    let m_i = m as isize;
    let (p0, p1, p2) = (psi_squared(bits, m_i), psi_squared(bits, m_i - 1), psi_squared(bits, m_i - 2));
    let del1 = p0 - p1;
    let del2 = p0 - 2.0 * p1 + p2;
    let m_f = m as f64;
    [gamma_q(2f64.powf(m_f - 2.0), del1 / 2.0), gamma_q(2f64.powf(m_f - 3.0), del2 / 2.0)]
}

fn log2_floor(n: usize) -> usize {
    (usize::BITS - 1 - n.leading_zeros()) as usize
}

pub fn serial(bits: &[u8], params: &TestParams) -> TestEntry {
    const NAME: &str = "Serial";
    let m = params.serial_m;
    let n = bits.len();
    if n == 0 || m + 2 >= log2_floor(n) {
        return TestEntry::not_applicable(NAME, format!("m = {m} needs m < ⌊log₂ n⌋ − 2"));
    }
    TestEntry::new(NAME, serial_p(bits, m).to_vec(), params.significance)
}

/// `Φ^m = Σ (ν_i/n)·ln(ν_i/n)` over wrapped overlapping `m`-bit patterns.
pub fn phi(bits: &[u8], m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let n = bits.len() as f64;
    pattern_counts(bits, m)
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * p.ln()
        })
        .sum()
}

/// Approximate entropy: `χ² = 2n(ln 2 − ApEn)`, `p = Q(2^{m−1}, χ²/2)`.
/// Returns `(ApEn, p)`.
pub fn approximate_entropy_p(bits: &[u8], m: usize) -> (f64, f64) {
    assert!(m >= 1 && m < bits.len());
    let apen = phi(bits, m) - phi(bits, m + 1);
    let n = bits.len() as f64;
    let chi2 = 2.0 * n * (std::f64::consts::LN_2 - apen);
    (apen, gamma_q(2f64.powi(m as i32 - 1), chi2 / 2.0))
}

pub fn approximate_entropy(bits: &[u8], params: &TestParams) -> TestEntry {
    const NAME: &str = "Approximate entropy";
    let m = params.apen_m;
    let n = bits.len();
    if n == 0 || m + 5 >= log2_floor(n) {
        return TestEntry::not_applicable(NAME, format!("m = {m} needs m < ⌊log₂ n⌋ − 5"));
    }
    let (apen, p) = approximate_entropy_p(bits, m);
    TestEntry::new(NAME, vec![p], params.significance).with_note(format!("ApEn = {apen:.6}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nist::frequency_p;

    #[test]
    fn counts_sum_to_n() {
        let bits: Vec<u8> = (0..37u32).map(|i| ((i * 7) % 3 == 0) as u8).collect();
        for m in 1..6 {
            assert_eq!(pattern_counts(&bits, m).iter().sum::<u64>(), 37);
        }
    }

    #[test]
    fn m1_matches_monobit() {
        let bits: Vec<u8> = (0..1000u32).map(|i| ((i.wrapping_mul(2654435761u32)) >> 13 & 1) as u8).collect();
        let [p1, _] = serial_p(&bits, 1);
        assert!((p1 - frequency_p(&bits)).abs() < 1e-12);
    }

    #[test]
    fn all_zeros_extremes() {
        let zeros = vec![0u8; 1 << 14];
        let [a, b] = serial_p(&zeros, 4);
        assert!(a < 1e-10 && b < 1e-10);
        let (apen, p) = approximate_entropy_p(&zeros, 3);
        assert_eq!(apen, 0.0);
        assert!(p < 1e-10);
    }

    #[test]
    fn de_bruijn_is_near_maximal() {
        // B(2, 4) of length 16: every 4-bit window appears once with wraparound.
        let db = [0u8, 0, 0, 0, 1, 0, 0, 1, 1, 0, 1, 0, 1, 1, 1, 1];
        assert!(pattern_counts(&db, 4).iter().all(|&c| c == 1));
        let (apen, _) = approximate_entropy_p(&db, 3);
        // Φ³ = ln(1/8), Φ⁴ = ln(1/16) ⇒ ApEn = ln 2 exactly.
        assert!((apen - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn gating() {
        let p = TestParams::default();
        assert!(!serial(&vec![0u8; 1000], &p).applicable);
        assert!(!approximate_entropy(&vec![0u8; 1000], &p).applicable);
    }
}
