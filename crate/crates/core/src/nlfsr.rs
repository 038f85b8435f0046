//! Nonlinear feedback shift registers for stretching a slow seed stream.
//!
//! The register holds `x0` in its least significant bit. Each clock emits
//! `x0`, shifts right and writes `f(register)` into the top bit.

use std::fmt;
use std::str::FromStr;

use crate::bits::BitStream;
use crate::config::{parse_bool, parse_value, Configurable};
use crate::error::{Error, Result};

pub const MAX_WIDTH: u32 = 32;
/// Widest register `period` will walk exhaustively.
pub const MAX_PERIOD_WIDTH: u32 = 24;
pub const DEFAULT_RESEED_INTERVAL: usize = 1024;
pub const DEFAULT_WIDTH: u32 = 24;

/// Feedback function in algebraic normal form. Each monomial is a bit mask
/// over register indices; the monomials are XORed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NlfsrSpec {
    width: u32,
    anf: Vec<u32>,
    include_zero_state: bool,
}

impl NlfsrSpec {
    pub fn new(width: u32, monomials: &[u32], include_zero_state: bool) -> Result<Self> {
        if !(3..=MAX_WIDTH).contains(&width) {
            return Err(Error::param("width", format!("{width} outside 3..={MAX_WIDTH}")));
        }
        let limit = if width == 32 { u32::MAX } else { (1u32 << width) - 1 };
        let mut anf = Vec::with_capacity(monomials.len());
        for &m in monomials {
            if m == 0 {
                return Err(Error::param("anf", "constant monomial is not allowed"));
            }
            if m & !limit != 0 {
                return Err(Error::param("anf", format!("monomial references a tap ≥ {width}")));
            }
            // x ⊕ x = 0: repeated monomials cancel in pairs
            match anf.iter().position(|&e| e == m) {
                Some(i) => {
                    anf.swap_remove(i);
                }
                None => anf.push(m),
            }
        }
        anf.sort_unstable_by_key(|&m| (m.count_ones(), taps_of(m)));
        Ok(NlfsrSpec { width, anf, include_zero_state })
    }

    /// Builds a spec from monomials written as lists of tap indices.
    pub fn from_taps(width: u32, monomials: &[&[u32]], include_zero_state: bool) -> Result<Self> {
        let mut masks = Vec::with_capacity(monomials.len());
        for taps in monomials {
            let mut m = 0u32;
            for &t in *taps {
                if t >= width {
                    return Err(Error::param("anf", format!("tap {t} ≥ width {width}")));
                }
                m |= 1 << t;
            }
            masks.push(m);
        }
        Self::new(width, &masks, include_zero_state)
    }

    fn cross_joined(width: u32, linear: &[u32], skip_a: u32, skip_b: u32) -> Result<Self> {
        let upper = ((1u32 << width) - 1) & !1;
        let mut anf: Vec<u32> = linear.iter().map(|t| 1 << t).collect();
        anf.extend([upper & !(1 << skip_a), upper & !(1 << skip_b)]);
        Self::new(width, &anf, false)
    }

    /// Verified full-period feedback for the widths 4, 8, 16, 20 and 24.
    pub fn shipped(width: u32) -> Result<Self> {
        let taps: &[&[u32]] = match width {
            4 => &[&[0], &[1], &[2], &[2, 3]],
            8 => &[&[0], &[1], &[5], &[1, 5]],
            16 => &[&[0], &[2], &[13], &[2, 3]],
            // The linear part is a primitive LFSR; the two near-complete
            // products swap successors on a cross-joined pair of conjugate
            // states, which keeps a single cycle through every nonzero state.
            20 => return Self::cross_joined(20, &[0, 1, 9, 10, 12, 13, 17, 19], 1, 6),
            24 => return Self::cross_joined(24, &[0, 6, 10, 12, 14, 15, 17, 18], 1, 2),
            _ => return Err(Error::param("width", format!("no shipped spec for width {width} (have 4, 8, 16, 20, 24)"))),
        };
        Self::from_taps(width, taps, false)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn monomials(&self) -> &[u32] {
        &self.anf
    }

    pub fn include_zero_state(&self) -> bool {
        self.include_zero_state
    }

    pub fn with_zero_state(mut self, on: bool) -> Self {
        self.include_zero_state = on;
        self
    }

    fn mask(&self) -> u32 {
        if self.width == 32 {
            u32::MAX
        } else {
            (1u32 << self.width) - 1
        }
    }

    #[inline]
    pub fn feedback(&self, register: u32) -> u32 {
        let mut f = 0u32;
        for &m in &self.anf {
            f ^= u32::from(register & m == m);
        }
        if self.include_zero_state && register >> 1 == 0 {
            f ^= 1;
        }
        f
    }

    #[inline]
    pub fn next_state(&self, register: u32) -> u32 {
        (register >> 1) | (self.feedback(register) << (self.width - 1))
    }

    /// Length of the cycle through `0…01`, and whether that cycle covers
    /// every nonzero state (every state with zero-state completion).
    pub fn period(&self) -> Result<PeriodReport> {
        if self.width > MAX_PERIOD_WIDTH {
            return Err(Error::param("width", format!("exhaustive walk limited to {MAX_PERIOD_WIDTH} bits")));
        }
        let states = 1u64 << self.width;
        let target = if self.include_zero_state { states } else { states - 1 };
        let mut s = self.next_state(1);
        let mut period = 1u64;
        while s != 1 && period <= states {
            s = self.next_state(s);
            period += 1;
        }
        Ok(PeriodReport { period, full: period == target })
    }
}

fn taps_of(m: u32) -> Vec<u32> {
    (0..32).filter(|b| m >> b & 1 == 1).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeriodReport {
    pub period: u64,
    pub full: bool,
}

impl fmt::Display for NlfsrSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "width={};anf=", self.width)?;
        for (i, m) in self.anf.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            let taps: Vec<String> = taps_of(*m).iter().map(u32::to_string).collect();
            f.write_str(&taps.join("*"))?;
        }
        if self.include_zero_state {
            f.write_str(";zero=1")?;
        }
        Ok(())
    }
}

impl FromStr for NlfsrSpec {
    type Err = Error;

    /// Parses `width=N;anf=0,1,2*3` with an optional `;zero=1`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |r: &str| Error::Format(format!("NLFSR spec {s:?}: {r}"));
        let (mut width, mut anf, mut zero) = (None, None, false);
        for part in s.trim().split(';').filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            match k.trim() {
                "width" => width = Some(v.trim().parse::<u32>().map_err(|_| bad("bad width"))?),
                "anf" => anf = Some(v.trim().to_string()),
                "zero" => zero = parse_bool("zero", v.trim())?,
                other => return Err(bad(&format!("unknown field {other:?}"))),
            }
        }
        let width = width.ok_or_else(|| bad("missing width"))?;
        let anf = anf.ok_or_else(|| bad("missing anf"))?;
        let mut masks = Vec::new();
        for mono in anf.split(',').map(str::trim).filter(|m| !m.is_empty()) {
            let mut m = 0u32;
            for tap in mono.split('*') {
                let t: u32 = tap.trim().parse().map_err(|_| bad(&format!("bad tap {tap:?}")))?;
                if t >= width {
                    return Err(bad(&format!("tap {t} ≥ width {width}")));
                }
                m |= 1 << t;
            }
            masks.push(m);
        }
        NlfsrSpec::new(width, &masks, zero)
    }
}

/// A running register with its reseed bookkeeping.
#[derive(Debug, Clone)]
pub struct ExpanderState {
    pub register: u32,
    pub spec: NlfsrSpec,
    pub bits_since_reseed: usize,
    pub reseed_interval: usize,
}

impl ExpanderState {
    /// Emits `x0` and advances the register.
    #[inline]
    pub fn clock(&mut self) -> bool {
        let out = self.register & 1 == 1;
        self.register = self.spec.next_state(self.register);
        self.bits_since_reseed += 1;
        out
    }

    /// Loads a new register value. An all-zero chunk becomes `0…01` unless
    /// the spec includes the zero state; returns whether it was replaced.
    pub fn reseed(&mut self, chunk: u32) -> bool {
        let chunk = chunk & self.spec.mask();
        self.bits_since_reseed = 0;
        if chunk == 0 && !self.spec.include_zero_state {
            self.register = 1;
            true
        } else {
            self.register = chunk;
            false
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExpandStats {
    pub seed_bits_used: usize,
    pub reseeds: usize,
    pub zero_chunks_replaced: usize,
}

/// Seed bits needed for `n_out` output bits.
pub fn seed_demand(width: u32, reseed_interval: usize, n_out: usize) -> usize {
    width as usize * n_out.div_ceil(reseed_interval)
}

/// Loads `width` seed bits (MSB-first), clocks out `reseed_interval` bits,
/// and repeats until `n_out` bits are produced.
pub fn expand(seed: &BitStream, spec: &NlfsrSpec, reseed_interval: usize, n_out: usize) -> Result<(BitStream, ExpandStats)> {
    if reseed_interval == 0 {
        return Err(Error::param("reseed_interval", "must be ≥ 1"));
    }
    let width = spec.width as usize;
    let epochs_available = seed.len() / width;
    if seed_demand(spec.width, reseed_interval, n_out) > seed.len() {
        return Err(Error::SeedExhausted { emitted: (epochs_available * reseed_interval).min(n_out), requested: n_out });
    }
    let mut state = ExpanderState { register: 1, spec: spec.clone(), bits_since_reseed: 0, reseed_interval };
    let mut stats = ExpandStats::default();
    let mut out = BitStream::with_capacity(n_out);
    let mut remaining = n_out;
    let mut pos = 0;
    while remaining > 0 {
        let chunk = (pos..pos + width).fold(0u32, |v, i| (v << 1) | u32::from(seed.get(i)));
        pos += width;
        stats.seed_bits_used += width;
        stats.reseeds += 1;
        if state.reseed(chunk) {
            stats.zero_chunks_replaced += 1;
        }
        let take = remaining.min(reseed_interval);
        for _ in 0..take {
            out.push(state.clock());
        }
        remaining -= take;
    }
    Ok((out, stats))
}

/// Register spec and reseed policy, configurable under `nlfsr.`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpandConfig {
    pub spec: NlfsrSpec,
    pub reseed_interval: usize,
}

impl Default for ExpandConfig {
    fn default() -> Self {
        ExpandConfig {
            spec: NlfsrSpec::shipped(DEFAULT_WIDTH).expect("shipped width"),
            reseed_interval: DEFAULT_RESEED_INTERVAL,
        }
    }
}

impl ExpandConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reseed_interval == 0 {
            return Err(Error::param("reseed_interval", "must be ≥ 1"));
        }
        Ok(())
    }

    pub fn key_values(&self) -> Vec<(&'static str, String)> {
        vec![("spec", self.spec.to_string()), ("reseed_interval", self.reseed_interval.to_string())]
    }
}

impl Configurable for ExpandConfig {
    fn set_key(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "width" => {
                let zero = self.spec.include_zero_state;
                self.spec = NlfsrSpec::shipped(parse_value(key, value)?)?.with_zero_state(zero);
            }
            "spec" => self.spec = value.parse()?,
            "zero_state" => {
                let on = parse_bool(key, value)?;
                self.spec = self.spec.clone().with_zero_state(on);
            }
            "reseed_interval" => self.reseed_interval = parse_value(key, value)?,
            _ => return Err(Error::UnknownKey(key.to_string())),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_cycle_rotates() {
        let spec = NlfsrSpec::from_taps(4, &[&[0]], false).unwrap();
        let mut st = ExpanderState { register: 0b0001, spec, bits_since_reseed: 0, reseed_interval: 16 };
        assert!(st.clock());
        assert_eq!(st.register, 0b1000);
        assert_eq!(st.spec.period().unwrap(), PeriodReport { period: 4, full: false });
    }

    #[test]
    fn canonical_form() {
        let a = NlfsrSpec::from_taps(4, &[&[3, 2], &[1], &[0], &[2]], false).unwrap();
        let b = NlfsrSpec::from_taps(4, &[&[0], &[1], &[2], &[2, 3], &[1], &[1]], false).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "width=4;anf=0,1,2,2*3");
        assert_eq!("width=4;anf=0,1,2,2*3".parse::<NlfsrSpec>().unwrap(), a);
    }

    #[test]
    fn round_trips_text() {
        for w in [4, 8, 16, 20] {
            let s = NlfsrSpec::shipped(w).unwrap().with_zero_state(w == 8);
            assert_eq!(s.to_string().parse::<NlfsrSpec>().unwrap(), s);
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!("width=4;anf=0,4".parse::<NlfsrSpec>().is_err());
        assert!("width=2;anf=0".parse::<NlfsrSpec>().is_err());
        assert!("anf=0".parse::<NlfsrSpec>().is_err());
        assert!(NlfsrSpec::new(4, &[0], false).is_err());
    }

    #[test]
    fn period_width_limit() {
        let s = NlfsrSpec::from_taps(25, &[&[0], &[3]], false).unwrap();
        assert!(s.period().is_err());
    }

    #[test]
    fn zero_chunk_replaced() {
        let spec = NlfsrSpec::shipped(4).unwrap();
        let seed = BitStream::from_ascii("0000 0001").unwrap();
        let (out, stats) = expand(&seed, &spec, 4, 8).unwrap();
        assert_eq!(stats.zero_chunks_replaced, 1);
        assert_eq!(out.slice(0, 4), out.slice(4, 4));
    }

    #[test]
    fn seed_exhaustion() {
        let spec = NlfsrSpec::shipped(4).unwrap();
        let seed = BitStream::from_ascii("1010 1100 1").unwrap();
        match expand(&seed, &spec, 10, 25) {
            Err(Error::SeedExhausted { emitted, requested }) => assert_eq!((emitted, requested), (20, 25)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(expand(&seed, &spec, 10, 20).is_ok());
        assert_eq!(expand(&BitStream::new(), &spec, 10, 0).unwrap().0.len(), 0);
    }

    #[test]
    fn config_keys() {
        let mut c = ExpandConfig::default();
        c.set_key("width", "8").unwrap();
        c.set_key("zero_state", "true").unwrap();
        assert_eq!(c.spec.width(), 8);
        assert!(c.spec.include_zero_state());
        assert!(c.set_key("bogus", "1").is_err());
    }
}
