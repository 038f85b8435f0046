use std::f64::consts::SQRT_2;

use super::{family_p_value, TestEntry, TestParams};
use crate::special::{erfc, gamma_q};

pub const EXCURSION_STATES: [i64; 8] = [-4, -3, -2, -1, 1, 2, 3, 4];
pub const VARIANT_STATES: [i64; 18] = [-9, -8, -7, -6, -5, -4, -3, -2, -1, 1, 2, 3, 4, 5, 6, 7, 8, 9];
/// Fewer zero-return cycles than this makes the chi-square approximations
/// unreliable and the tests are skipped.
pub const MIN_CYCLES: usize = 500;

/// Cycle decomposition of the ±1 walk `S' = 0, S₁, …, S_n, 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExcursionCycles {
    /// Number of cycles `J`.
    pub cycles: usize,
    /// `visits[c][x + 9]`: visits to state `x ∈ [−9, 9]` during cycle `c`.
    pub visits: Vec<[u32; 19]>,
}

impl ExcursionCycles {
    pub fn visits_to(&self, cycle: usize, state: i64) -> u32 {
        self.visits[cycle][(state + 9) as usize]
    }

    pub fn total_visits(&self, state: i64) -> u64 {
        self.visits.iter().map(|v| u64::from(v[(state + 9) as usize])).sum()
    }
}

pub fn excursion_cycles(bits: &[u8]) -> ExcursionCycles {
    let mut visits = Vec::new();
    let mut current = [0u32; 19];
    let mut s = 0i64;
    let mut open = false;
    for &b in bits {
        s += 2 * i64::from(b) - 1;
        open = true;
        if s == 0 {
            visits.push(current);
            current = [0; 19];
            open = false;
        } else if (-9..=9).contains(&s) {
            current[(s + 9) as usize] += 1;
        }
    }
    // the appended final zero closes an unfinished excursion
    if open {
        visits.push(current);
    }
    ExcursionCycles { cycles: visits.len(), visits }
}

fn state_probabilities(x: i64) -> [f64; 6] {
    let ax = x.unsigned_abs() as f64;
    let q = 1.0 - 1.0 / (2.0 * ax);
    let mut pi = [0.0; 6];
    pi[0] = q;
    for (k, p) in pi.iter_mut().enumerate().take(5).skip(1) {
        *p = 1.0 / (4.0 * ax * ax) * q.powi(k as i32 - 1);
    }
    pi[5] = 1.0 / (2.0 * ax) * q.powi(4);
    pi
}

/// One p-value per state `x ∈ {±1, …, ±4}`, from the distribution of
/// per-cycle visit counts (0, 1, …, 4, ≥5). `None` when there are no cycles.
pub fn random_excursions_p(bits: &[u8]) -> Option<Vec<f64>> {
    let ex = excursion_cycles(bits);
    let j = ex.cycles as f64;
    if ex.cycles == 0 {
        return None;
    }
    Some(
        EXCURSION_STATES
            .iter()
            .map(|&x| {
                let mut nu = [0u64; 6];
                for c in 0..ex.cycles {
                    nu[(ex.visits_to(c, x) as usize).min(5)] += 1;
                }
                let chi2: f64 = nu
                    .iter()
                    .zip(state_probabilities(x))
                    .map(|(&v, p)| (v as f64 - j * p).powi(2) / (j * p))
                    .sum();
                gamma_q(2.5, chi2 / 2.0)
            })
            .collect(),
    )
}

/// One p-value per state `x ∈ {±1, …, ±9}` from the total visit count.
pub fn random_excursions_variant_p(bits: &[u8]) -> Option<Vec<f64>> {
    let ex = excursion_cycles(bits);
    if ex.cycles == 0 {
        return None;
    }
    let j = ex.cycles as f64;
    Some(
        VARIANT_STATES
            .iter()
            .map(|&x| {
                let xi = ex.total_visits(x) as f64;
                erfc((xi - j).abs() / (SQRT_2 * (j * (4.0 * x.unsigned_abs() as f64 - 2.0)).sqrt()))
            })
            .collect(),
    )
}

fn family_entry(name: &str, states: &[i64], ps: Vec<f64>, cycles: usize, params: &TestParams) -> TestEntry {
    let mut entry = TestEntry::new(name, vec![family_p_value(&ps)], params.significance)
        .with_note(format!("J = {cycles}; smallest of {} state p-values, Šidák-adjusted", ps.len()));
    entry.sub_results = states.iter().zip(ps).map(|(x, p)| (format!("x={x:+}"), p)).collect();
    entry
}

pub fn random_excursions(bits: &[u8], params: &TestParams) -> TestEntry {
    const NAME: &str = "Random excursions";
    let cycles = excursion_cycles(bits).cycles;
    if cycles < MIN_CYCLES {
        return TestEntry::not_applicable(NAME, format!("J = {cycles} cycles, needs {MIN_CYCLES}"));
    }
    let ps = random_excursions_p(bits).expect("cycles present");
    family_entry(NAME, &EXCURSION_STATES, ps, cycles, params)
}

pub fn random_excursions_variant(bits: &[u8], params: &TestParams) -> TestEntry {
    const NAME: &str = "Random excursions variant";
    let cycles = excursion_cycles(bits).cycles;
    if cycles < MIN_CYCLES {
        return TestEntry::not_applicable(NAME, format!("J = {cycles} cycles, needs {MIN_CYCLES}"));
    }
    let ps = random_excursions_variant_p(bits).expect("cycles present");
    family_entry(NAME, &VARIANT_STATES, ps, cycles, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probabilities_sum_to_one() {
        for x in EXCURSION_STATES {
            let s: f64 = state_probabilities(x).iter().sum();
            assert!((s - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn cycle_split() {
        // walk: 1,0 | -1,0 | 1,2,1,2,3 (closed by the appended zero)
        let bits = [1u8, 0, 0, 1, 1, 1, 0, 1, 1];
        let ex = excursion_cycles(&bits);
        assert_eq!(ex.cycles, 3);
        assert_eq!(ex.visits_to(0, 1), 1);
        assert_eq!(ex.visits_to(1, -1), 1);
        assert_eq!(ex.visits_to(2, 1), 2);
        assert_eq!(ex.visits_to(2, 2), 2);
        assert_eq!(ex.visits_to(2, 3), 1);
    }

    #[test]
    fn all_zeros_has_one_open_cycle() {
        let ex = excursion_cycles(&[0u8; 1000]);
        assert_eq!(ex.cycles, 1);
        let e = random_excursions(&[0u8; 1000], &TestParams::default());
        assert!(!e.applicable && e.p_values.is_empty());
    }

    #[test]
    fn short_stream_gated() {
        let bits: Vec<u8> = (0..2000u32).map(|i| ((i.wrapping_mul(2654435761u32)) >> 11 & 1) as u8).collect();
        assert!(!random_excursions(&bits, &TestParams::default()).applicable);
        assert!(!random_excursions_variant(&bits, &TestParams::default()).applicable);
    }
}
