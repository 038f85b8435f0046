//! Special functions needed by the randomness tests: `ln Γ`, the regularized
//! incomplete gamma functions, `erfc` and the standard normal CDF.
//!
//! `erfc` is evaluated through the identity `erfc(x) = Q(1/2, x²)`, so every
//! p-value in the test battery goes through the same incomplete-gamma kernel.

use std::f64::consts::PI;

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 1_000_000;
const TINY: f64 = 1e-300;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Correction term of Stirling's series, `ln Γ(x) − [(x−½)ln x − x + ½ln 2π]`.
fn stirling_correction(x: f64) -> f64 {
    let x2 = x * x;
    let inv = 1.0 / x;
    let inv2 = 1.0 / x2;
    inv * (1.0 / 12.0
        - inv2
            * (1.0 / 360.0
                - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 * (1.0 / 1188.0)))))
}

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x >= 10.0 {
        return (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + stirling_correction(x);
    }
    if x < 0.5 {
        // Γ(x) = Γ(x+1)/x keeps the Lanczos sum in its accurate range.
        return ln_gamma(x + 1.0) - x.ln();
    }
    let z = x - 1.0;
    let mut sum = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + sum.ln()
}

/// `a ln x − x − ln Γ(a)`, arranged to avoid cancellation when `a` is large
/// and `x ≈ a`.
fn log_prefix(a: f64, x: f64) -> f64 {
    if a >= 10.0 {
        let t = (x - a) / a;
        let core = if t.abs() < 0.5 {
            a * (t.ln_1p() - t)
        } else {
            a * (x / a).ln() + a - x
        };
        core + 0.5 * a.ln() - 0.5 * (2.0 * PI).ln() - stirling_correction(a)
    } else {
        a * x.ln() - x - ln_gamma(a)
    }
}

fn lower_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * log_prefix(a, x).exp()
}

/// Modified Lentz evaluation of the continued fraction for `Q(a, x)`.
fn upper_fraction(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    log_prefix(a, x).exp() * h
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    assert!(a > 0.0, "gamma_p requires a > 0");
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        lower_series(a, x).clamp(0.0, 1.0)
    } else {
        (1.0 - upper_fraction(a, x)).clamp(0.0, 1.0)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 − P(a, x)`; the `igamc`
/// of the randomness-test literature.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    assert!(a > 0.0, "gamma_q requires a > 0");
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        (1.0 - lower_series(a, x)).clamp(0.0, 1.0)
    } else {
        upper_fraction(a, x).clamp(0.0, 1.0)
    }
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == 0.0 {
        return 1.0;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x > 27.3 {
        // below the smallest subnormal
        return 0.0;
    }
    gamma_q(0.5, x * x)
}

/// Standard normal cumulative distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_integers() {
        let mut fact = 1.0_f64;
        for n in 1..30 {
            // Γ(n+1) = n!
            fact *= n as f64;
            let rel = (ln_gamma(n as f64 + 1.0) - fact.ln()).abs() / fact.ln().max(1.0);
            assert!(rel < 1e-14, "n={n} rel={rel}");
        }
        assert!((ln_gamma(0.5) - PI.sqrt().ln()).abs() < 1e-14);
    }

    #[test]
    fn p_plus_q_is_one() {
        for &a in &[0.25, 0.5, 1.0, 2.5, 8.0, 50.0, 512.0, 32768.0] {
            for &f in &[0.1, 0.5, 0.9, 1.0, 1.1, 2.0, 5.0] {
                let x = a * f;
                let s = gamma_p(a, x) + gamma_q(a, x);
                assert!((s - 1.0).abs() < 1e-12, "a={a} x={x} s={s}");
            }
        }
    }

    #[test]
    fn exponential_case() {
        // Q(1, x) = e^{-x}
        for &x in &[0.01, 0.5, 1.0, 3.0, 20.0] {
            assert!((gamma_q(1.0, x) - (-x).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn erfc_symmetry_and_edges() {
        assert_eq!(erfc(0.0), 1.0);
        for &x in &[0.1, 0.7, 1.3, 4.0] {
            assert!((erfc(x) + erfc(-x) - 2.0).abs() < 1e-15);
        }
        assert_eq!(erfc(40.0), 0.0);
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-16);
    }
}
