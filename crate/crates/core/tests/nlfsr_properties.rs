use std::collections::HashSet;
use std::time::Instant;

use proptest::prelude::*;
use trng_core::nlfsr::*;
use trng_core::BitStream;

fn visited(spec: &NlfsrSpec, start: u32) -> HashSet<u32> {
    let mut seen = HashSet::new();
    let mut s = start;
    while seen.insert(s) {
        s = spec.next_state(s);
    }
    seen
}

#[test]
fn four_bit_walk_visits_every_nonzero_state() {
    let spec = NlfsrSpec::shipped(4).unwrap();
    let seen = visited(&spec, 0b0001);
    assert_eq!(seen.len(), 15);
    assert!(!seen.contains(&0));
    assert_eq!(spec.period().unwrap(), PeriodReport { period: 15, full: true });
}

#[test]
fn zero_state_completion_gives_sixteen() {
    let spec = NlfsrSpec::shipped(4).unwrap().with_zero_state(true);
    assert_eq!(visited(&spec, 1).len(), 16);
    assert_eq!(spec.period().unwrap(), PeriodReport { period: 16, full: true });
}

#[test]
fn every_shipped_width_is_full_period() {
    for w in [4u32, 8, 16, 20, 24] {
        let spec = NlfsrSpec::shipped(w).unwrap();
        let r = spec.period().unwrap();
        assert_eq!(r, PeriodReport { period: (1u64 << w) - 1, full: true }, "width {w}");
    }
}

#[test]
fn twenty_bit_completion_covers_every_state() {
    let spec = NlfsrSpec::shipped(20).unwrap().with_zero_state(true);
    assert_eq!(spec.period().unwrap(), PeriodReport { period: 1 << 20, full: true });
}

#[test]
fn fifteen_bits_from_one_epoch() {
    let spec = NlfsrSpec::shipped(4).unwrap();
    let seed = BitStream::from_ascii("0001").unwrap();
    let (out, stats) = expand(&seed, &spec, 15, 15).unwrap();
    assert_eq!(out.to_ascii().trim(), "100010111101001");
    assert_eq!(stats.seed_bits_used, 4);
}

#[test]
fn linear_feedback_matches_hand_lfsr_table() {
    // s[n+4] = s[n] ⊕ s[n+1] from s = 1,0,0,0
    let spec = NlfsrSpec::from_taps(4, &[&[0], &[1]], false).unwrap();
    let seed = BitStream::from_ascii("0001").unwrap();
    let (out, _) = expand(&seed, &spec, 30, 30).unwrap();
    assert_eq!(out.to_ascii().trim(), "100010011010111".repeat(2));
}

#[test]
fn different_seeds_diverge() {
    let spec = NlfsrSpec::shipped(DEFAULT_WIDTH).unwrap();
    let n = 10_000;
    let need = seed_demand(spec.width(), 64, n);
    let a = BitStream::from_bits((0..need).map(|i| (i * 7 + i / 3) % 5 < 2));
    let b = BitStream::from_bits((0..need).map(|i| (i * i + 3 * i) % 7 < 3));
    let (x, _) = expand(&a, &spec, 64, n).unwrap();
    let (y, _) = expand(&b, &spec, 64, n).unwrap();
    let differ = x.iter().zip(y.iter()).filter(|(p, q)| p != q).count();
    assert!(differ as f64 >= 0.3 * n as f64, "{differ} of {n} bits differ");
}

#[test]
fn expander_exceeds_one_megabit_per_second() {
    let cfg = ExpandConfig::default();
    let n = 4_000_000;
    let seed = BitStream::from_bits((0..seed_demand(cfg.spec.width(), cfg.reseed_interval, n)).map(|i| i % 3 == 0));
    let t = Instant::now();
    let (out, _) = expand(&seed, &cfg.spec, cfg.reseed_interval, n).unwrap();
    let rate = out.len() as f64 / t.elapsed().as_secs_f64();
    assert!(rate >= 1e6, "{rate:.3e} bit/s");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn text_form_round_trips(width in 3u32..=32, raw in prop::collection::vec(1u32..u32::MAX, 1..8), zero: bool) {
        let mask = if width == 32 { u32::MAX } else { (1 << width) - 1 };
        let monos: Vec<u32> = raw.iter().map(|m| m & mask).filter(|&m| m != 0).collect();
        prop_assume!(!monos.is_empty());
        let spec = NlfsrSpec::new(width, &monos, zero).unwrap();
        let back: NlfsrSpec = spec.to_string().parse().unwrap();
        prop_assert_eq!(back, spec);
    }

    #[test]
    fn expansion_is_deterministic_and_exact_length(n in 1usize..5000, interval in 1usize..300, seed in any::<u64>()) {
        let spec = NlfsrSpec::shipped(16).unwrap();
        let need = seed_demand(16, interval, n);
        let bits = BitStream::from_bits((0..need).map(|i| (seed.rotate_left(i as u32 % 64) ^ i as u64) & 1 == 1));
        let (a, sa) = expand(&bits, &spec, interval, n).unwrap();
        let (b, sb) = expand(&bits, &spec, interval, n).unwrap();
        prop_assert_eq!(a.len(), n);
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(sa, sb);
        prop_assert_eq!(sa.seed_bits_used, need);
    }

    #[test]
    fn short_seed_is_an_error(n in 1usize..5000, interval in 1usize..300) {
        let need = seed_demand(8, interval, n);
        let seed = BitStream::from_bits(std::iter::repeat(true).take(need - 1));
        prop_assert!(expand(&seed, &NlfsrSpec::shipped(8).unwrap(), interval, n).is_err());
    }
}
