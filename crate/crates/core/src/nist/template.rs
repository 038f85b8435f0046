use super::{family_p_value, TemplateChoice, TestEntry, TestParams};
use crate::special::gamma_q;

/// Templates of length `m` that cannot overlap a shifted copy of
/// themselves, in ascending numeric order (148 of them for `m = 9`).
pub fn aperiodic_templates(m: usize) -> Vec<Vec<u8>> {
    assert!((1..=16).contains(&m));
    (0u32..1 << m)
        .map(|v| (0..m).map(|i| ((v >> (m - 1 - i)) & 1) as u8).collect::<Vec<u8>>())
        .filter(|t| (1..m).all(|shift| t[shift..] != t[..m - shift]))
        .collect()
}

/// Non-overlapping occurrences of `template` in `block`: after a match the
/// scan resumes past the matched bits.
pub fn template_matches(block: &[u8], template: &[u8]) -> usize {
    let m = template.len();
    let mut count = 0;
    let mut i = 0;
    while i + m <= block.len() {
        if &block[i..i + m] == template {
            count += 1;
            i += m;
        } else {
            i += 1;
        }
    }
    count
}

/// Counts every template over `blocks` equal blocks; returns
/// `Q(N/2, χ²/2)` with the theoretical match mean and variance.
pub fn template_p(bits: &[u8], template: &[u8], blocks: usize) -> f64 {
    let m = template.len();
    let block_len = bits.len() / blocks;
    assert!(block_len >= m, "template longer than the block");
    let counts: Vec<usize> = bits.chunks_exact(block_len).take(blocks).map(|b| template_matches(b, template)).collect();
    chi2_p(&counts, block_len, m)
}

fn chi2_p(counts: &[usize], block_len: usize, m: usize) -> f64 {
    let two_m = (1u64 << m) as f64;
    let mean = (block_len - m + 1) as f64 / two_m;
    let var = block_len as f64 * (1.0 / two_m - (2.0 * m as f64 - 1.0) / (two_m * two_m));
    let chi2: f64 = counts.iter().map(|&w| (w as f64 - mean).powi(2) / var).sum();
    gamma_q(counts.len() as f64 / 2.0, chi2 / 2.0)
}

/// Windowed pattern codes: `codes[i]` holds bits `i..i+m` as an integer.
fn window_codes(block: &[u8], m: usize) -> Vec<u16> {
    if block.len() < m {
        return Vec::new();
    }
    let mask = ((1u32 << m) - 1) as u16;
    let mut out = Vec::with_capacity(block.len() - m + 1);
    let mut v: u16 = 0;
    for (i, &b) in block.iter().enumerate() {
        v = ((v << 1) | u16::from(b)) & mask;
        if i + 1 >= m {
            out.push(v);
        }
    }
    out
}

fn count_code(codes: &[u16], code: u16, m: usize) -> usize {
    let mut count = 0;
    let mut i = 0;
    while i < codes.len() {
        if codes[i] == code {
            count += 1;
            i += m;
        } else {
            i += 1;
        }
    }
    count
}

fn code_of(t: &[u8]) -> u16 {
    t.iter().fold(0u16, |v, &b| (v << 1) | u16::from(b))
}

pub fn non_overlapping_template(bits: &[u8], params: &TestParams) -> TestEntry {
    const NAME: &str = "Non overlapping template";
    let blocks = params.template_blocks;
    let block_len = bits.len() / blocks;
    let templates = match &params.template {
        TemplateChoice::AllAperiodic(m) => aperiodic_templates(*m),
        TemplateChoice::Single(t) => vec![t.clone()],
    };
    let m = templates[0].len();
    if block_len < m || block_len == 0 {
        return TestEntry::not_applicable(NAME, format!("template of length {m} does not fit a block of {block_len} bits"));
    }
    if m > 16 {
        return TestEntry::not_applicable(NAME, "templates longer than 16 bits are not supported");
    }
    let block_codes: Vec<Vec<u16>> =
        bits.chunks_exact(block_len).take(blocks).map(|b| window_codes(b, m)).collect();
    let sub: Vec<(String, f64)> = templates
        .iter()
        .map(|t| {
            let code = code_of(t);
            let counts: Vec<usize> = block_codes.iter().map(|c| count_code(c, code, m)).collect();
            let label: String = t.iter().map(|&b| char::from(b'0' + b)).collect();
            (label, chi2_p(&counts, block_len, m))
        })
        .collect();
    if sub.len() == 1 {
        return TestEntry::new(NAME, vec![sub[0].1], params.significance);
    }
    let ps: Vec<f64> = sub.iter().map(|s| s.1).collect();
    let min_p = ps.iter().copied().fold(1.0_f64, f64::min);
    let mut entry = TestEntry::new(NAME, vec![family_p_value(&ps)], params.significance).with_note(format!(
        "{} templates of length {m}; smallest per-template p = {min_p:.6}, Šidák-adjusted",
        ps.len()
    ));
    entry.sub_results = sub;
    entry
}
