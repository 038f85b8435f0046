//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

mod values {
    #![allow(dead_code)]
    include!("fixtures/oracle_values.rs");
}

use std::process::ExitCode;
use std::time::Instant;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use trng_core::analysis::{bit_balance, default_alpha, gaussian_fit, slope_series, time_lag, BinRule, Histogram};
use trng_core::bits::sha256_hex;
use trng_core::chain::ChainConfig;
use trng_core::crypto::{decrypt, dp_perturb, encrypt, perturbation_report, EntropyPool, PerturbConfig, DEVIATE_BITS};
use trng_core::nist::*;
use trng_core::nlfsr::{expand, seed_demand, ExpandConfig, NlfsrSpec, PeriodReport};
use trng_core::pipeline::generate;
use trng_core::pnm::{Bitmap, Image};
use trng_core::sim::{integrate_charge, simulate, ChargeTrace, SimParams, DEFAULT_CHARGE_WINDOW};
use trng_core::{BitStream, Error};
use values::*;

/// SHA-256 of the default 10⁵-step trace CSV.
const DEFAULT_TRACE_SHA256: &str = "c26f2514f5390039a7b0d62b389783e978c711efeb149ff4320130029f8da78b";
const PIPELINE_BITS: usize = 1_000_000;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn determinism() -> Outcome {
    let params = SimParams::default();
    let t = Instant::now();
    let a = simulate(&params).map_err(|e| e.to_string())?.to_csv();
    let secs = t.elapsed().as_secs_f64();
    let b = simulate(&params).map_err(|e| e.to_string())?.to_csv();
    let hash = sha256_hex(a.as_bytes());
    check(
        a == b && hash == DEFAULT_TRACE_SHA256 && secs < 10.0,
        format!("identical reruns: {}, hash matches pinned: {}, {} steps in {secs:.2} s", a == b, hash == DEFAULT_TRACE_SHA256, params.n_steps),
    )
}

fn gaussian_slopes() -> Outcome {
    let t = Instant::now();
    let trace = simulate(&SimParams::default()).map_err(|e| e.to_string())?;
    let slopes = slope_series(&trace.samples, trace.dt).map_err(|e| e.to_string())?;
    let hist = Histogram::build(&slopes.values, BinRule::FreedmanDiaconis).map_err(|e| e.to_string())?;
    let fit = gaussian_fit(&hist).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    check(
        fit.r_squared >= 0.95 && secs < 5.0,
        format!("r² = {:.5} over {} slopes in {} bins, {secs:.2} s", fit.r_squared, slopes.values.len(), hist.counts.len()),
    )
}

fn power_calibration() -> Outcome {
    let params = SimParams::paper_power();
    let mean_i = simulate(&params).map_err(|e| e.to_string())?.mean();
    let power = mean_i * params.bias_v;
    check(
        (0.5e-6..=2.0e-6).contains(&mean_i) && (0.025e-6..=0.1e-6).contains(&power),
        format!("mean current {:.4} µA, mean power {:.4} µW at {} V", mean_i * 1e6, power * 1e6, params.bias_v),
    )
}

fn tl_diagonal() -> Outcome {
    let trace = simulate(&SimParams::default()).map_err(|e| e.to_string())?;
    let charge = integrate_charge(&trace, DEFAULT_CHARGE_WINDOW).map_err(|e| e.to_string())?;
    let grid = time_lag(&charge, 256, default_alpha(&charge.values)).map_err(|e| e.to_string())?;
    let frac = grid.diagonal_fraction(-1.0, 0.1);
    // the normalization must hold on unrelated inputs too
    let others = [
        vec![1.0; 5],
        (0..50).map(|i| (i % 2) as f64).collect::<Vec<_>>(),
        (0..200).map(|i| ((i * 7919) % 101) as f64 * 1e-9).collect(),
    ];
    let mut worst = grid.max_value().abs();
    for q in others {
        let g = time_lag(&ChargeTrace { window: 1.0, values: q.clone() }, 64, default_alpha(&q)).map_err(|e| e.to_string())?;
        worst = worst.max(g.max_value().abs());
    }
    check(frac >= 0.6 && worst <= 1e-9, format!("diagonal fraction {frac:.3} of cells with TL > −1, max |TL max| = {worst:.1e}"))
}

fn bit_balance_check(bits: &BitStream, secs: f64) -> Outcome {
    let b = bit_balance(bits).map_err(|e| e.to_string())?;
    check(
        (0.49..=0.51).contains(&b.ones_fraction) && secs < 30.0,
        format!("ones fraction {:.6} over {} bits, pipeline {secs:.2} s", b.ones_fraction, b.n_bits),
    )
}

fn nist_suite(bits: &BitStream) -> Outcome {
    // (a) small fixtures against the arbitrary-precision references
    let b = |s: &str| BitStream::from_ascii(s).unwrap().to_vec();
    let ex = b(EXCURSION_BITS);
    let mut fixtures: Vec<(&str, f64, f64)> = vec![
        ("frequency", frequency_p(&b("1011010101")), FREQUENCY_1011010101),
        ("block frequency", block_frequency_p(&b(BLOCK_FREQ_BITS), 4), BLOCK_FREQ_M4),
        ("runs", runs_p(&b("1001101011")).unwrap_or(f64::NAN), RUNS_1001101011),
        ("cusum forward", cumulative_sums_p(&b(CUSUM_BITS), true), CUSUM_FORWARD),
        ("cusum backward", cumulative_sums_p(&b(CUSUM_BITS), false), CUSUM_BACKWARD),
        ("serial 1", serial_p(&b(SERIAL_BITS), 3)[0], SERIAL_P_M3[0]),
        ("serial 2", serial_p(&b(SERIAL_BITS), 3)[1], SERIAL_P_M3[1]),
        ("approximate entropy", approximate_entropy_p(&b(APEN_BITS), 2).1, APEN_M2.1),
        ("template", template_p(&b(TEMPLATE_BITS), &[0, 0, 1], 2), TEMPLATE_001_N2),
        ("fft", spectral_p(&b(FFT_BITS)), FFT_P),
        ("longest run", longest_run_p(&b(include_str!("fixtures/longest_run_6272.txt").trim()), LongestRunTable::M128), LONGEST_RUN_6272),
    ];
    let exc = random_excursions_p(&ex).unwrap_or_default();
    let var = random_excursions_variant_p(&ex).unwrap_or_default();
    fixtures.extend(exc.iter().zip(EXCURSION_P).map(|(&g, w)| ("random excursions", g, w)));
    fixtures.extend(var.iter().zip(EXCURSION_VARIANT_P).map(|(&g, w)| ("random excursions variant", g, w)));
    let worst = fixtures.iter().map(|(_, g, w)| (g - w).abs()).fold(0.0f64, |a, d| if d.is_nan() { f64::INFINITY } else { a.max(d) });
    let fixtures_ok = worst <= 1e-6 && exc.len() == 8 && var.len() == 18;

    // (b) the pipeline stream
    let params = TestParams::default();
    let report = run_suite(bits, &params).map_err(|e| e.to_string())?;
    let applicable = report.entries.iter().filter(|e| e.applicable).count();
    let failed: Vec<&str> = report.entries.iter().filter(|e| e.applicable && !e.pass).map(|e| e.test_name.as_str()).collect();
    let stream_ok = report.all_applicable_pass();
    println!("{}", report.to_table().trim_end());

    // (c) adversarial streams
    let zeros = run_suite(&BitStream::from_bits(vec![false; PIPELINE_BITS]), &params).map_err(|e| e.to_string())?;
    let zeros_ok = zeros.entries.iter().filter(|e| e.applicable).all(|e| !e.pass);
    let alt = run_suite(&BitStream::from_bits((0..PIPELINE_BITS).map(|i| i % 2 == 0)), &params).map_err(|e| e.to_string())?;
    let alt_ok = ["Runs", "Longest run", "FFT", "Non overlapping template", "Serial", "Approximate entropy"]
        .iter()
        .all(|n| alt.entry(n).is_some_and(|e| e.applicable && !e.pass));

    check(
        fixtures_ok && stream_ok && zeros_ok && alt_ok,
        format!(
            "(a) {} fixture p-values, worst deviation {worst:.1e}; (b) {applicable} applicable tests, failures {failed:?}; (c) all-zeros rejected: {zeros_ok}, alternation rejected: {alt_ok}",
            fixtures.len()
        ),
    )
}

fn nlfsr() -> Outcome {
    let p4 = NlfsrSpec::shipped(4).and_then(|s| s.period()).map_err(|e| e.to_string())?;
    let p4z = NlfsrSpec::shipped(4).and_then(|s| s.with_zero_state(true).period()).map_err(|e| e.to_string())?;
    let p20 = NlfsrSpec::shipped(20).and_then(|s| s.period()).map_err(|e| e.to_string())?;
    let cfg = ExpandConfig::default();
    let n = 8_000_000;
    let seed = BitStream::from_bits((0..seed_demand(cfg.spec.width(), cfg.reseed_interval, n)).map(|i| (i * 31 + i / 7) % 3 == 0));
    let t = Instant::now();
    let (out, _) = expand(&seed, &cfg.spec, cfg.reseed_interval, n).map_err(|e| e.to_string())?;
    let rate = out.len() as f64 / t.elapsed().as_secs_f64();
    check(
        p4 == PeriodReport { period: 15, full: true }
            && p4z == PeriodReport { period: 16, full: true }
            && p20 == PeriodReport { period: (1 << 20) - 1, full: true }
            && rate >= 1e6,
        format!(
            "4-bit period {} (zero-state {}), 20-bit period {}, default {}-bit expander {:.1} Mbit/s",
            p4.period,
            p4z.period,
            p20.period,
            cfg.spec.width(),
            rate / 1e6
        ),
    )
}

fn bitmap() -> Outcome {
    let side = 1024;
    let out = generate(&SimParams::default(), &ChainConfig::default(), &ExpandConfig::default(), side * side).map_err(|e| e.to_string())?;
    let bm = Bitmap::from_bits(&out.expanded, side).map_err(|e| e.to_string())?;
    let fractions: Vec<f64> = (0..4).map(|k| bm.ones_fraction(k * 256, k * 256, 128, 128)).collect();
    check(
        fractions.iter().all(|f| (0.47..=0.53).contains(f)),
        format!("{side}×{side} bitmap, diagonal 128×128 tile ones fractions {:.4?}", fractions),
    )
}

fn crypto_round_trip(source: &BitStream) -> Outcome {
    let mut pool = EntropyPool::new(source.clone());
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(2024);
    let mut total = 0usize;
    for i in 0..200 {
        let len = match i {
            0 => 0,
            1 => 1_000_000,
            _ => (rng.next_u64() % 1_000_001) as usize,
        };
        let mut msg = vec![0u8; len];
        rng.fill_bytes(&mut msg);
        let (env, keys) = encrypt(&msg, &mut pool).map_err(|e| e.to_string())?;
        if decrypt(&env.to_bytes(), &keys).map_err(|e| e.to_string())? != msg {
            return Err(format!("round trip {i} (length {len}) differs"));
        }
        total += len;
    }
    let mut msg = vec![0u8; 10_000];
    rng.fill_bytes(&mut msg);
    let (env, keys) = encrypt(&msg, &mut pool).map_err(|e| e.to_string())?;
    let bytes = env.to_bytes();
    let mut rejected = 0;
    for _ in 0..1000 {
        let bit = (rng.next_u64() % (bytes.len() as u64 * 8)) as usize;
        let mut bad = bytes.clone();
        bad[bit / 8] ^= 1 << (bit % 8);
        rejected += usize::from(matches!(decrypt(&bad, &keys), Err(Error::Authentication)));
    }
    check(rejected == 1000, format!("200 round trips ({total} bytes), {rejected}/1000 corruptions rejected"))
}

fn dp_scaling() -> Outcome {
    let n = 1000;
    let image = Image::filled(n, n, 1, 0.5);
    let mut maes = Vec::new();
    let mut ok = true;
    for (k, eps) in [0.5, 1.0, 2.0, 4.0].into_iter().enumerate() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(500 + k as u64);
        let nbits = n * n * DEVIATE_BITS;
        let mut bytes = vec![0u8; nbits.div_ceil(8)];
        rng.fill_bytes(&mut bytes);
        let mut pool = EntropyPool::new(BitStream::from_bytes(bytes, nbits).map_err(|e| e.to_string())?);
        let cfg = PerturbConfig { epsilon: eps, sensitivity: 1.0, clip: false };
        let out = dp_perturb(&image, &cfg, &mut pool).map_err(|e| e.to_string())?;
        let mae = perturbation_report(&image, &out).map_err(|e| e.to_string())?.mae;
        ok &= (mae - cfg.scale()).abs() <= 0.02 * cfg.scale();
        maes.push(mae);
    }
    let decreasing = maes.windows(2).all(|w| w[1] < w[0]);
    check(ok && decreasing, format!("MAE × ε for ε = 0.5, 1, 2, 4: {:.4?}", maes.iter().zip([0.5, 1.0, 2.0, 4.0]).map(|(m, e)| m * e).collect::<Vec<_>>()))
}

fn main() -> ExitCode {
    let t = Instant::now();
    let pipeline = generate(&SimParams::default(), &ChainConfig::default(), &ExpandConfig::default(), PIPELINE_BITS);
    let secs = t.elapsed().as_secs_f64();
    let pipeline = match pipeline {
        Ok(p) => p,
        Err(e) => {
            println!("pipeline failed: {e}");
            return ExitCode::FAILURE;
        }
    };

    let results: Vec<(&str, Outcome)> = vec![
        ("1 determinism", determinism()),
        ("2 gaussian slopes", gaussian_slopes()),
        ("3 power calibration", power_calibration()),
        ("4 time-lag diagonal", tl_diagonal()),
        ("5 bit balance", bit_balance_check(&pipeline.expanded, secs)),
        ("6 statistical suite", nist_suite(&pipeline.expanded)),
        ("7 nlfsr", nlfsr()),
        ("8 bitmap", bitmap()),
        ("9 crypto round trip", crypto_round_trip(&pipeline.expanded)),
        ("10 dp noise scaling", dp_scaling()),
    ];
    let mut failures = 0;
    for (name, r) in &results {
        match r {
            Ok(d) => println!("criterion {name}: PASS ({d})"),
            Err(d) => {
                failures += 1;
                println!("criterion {name}: FAIL ({d})");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failures, results.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
