//! Consumers of generated bits: one-time passwords, an authenticated file
//! envelope and Laplace-noise image perturbation.

use aes::cipher::{KeyIvInit, StreamCipher};
use hmac::{Hmac, Mac};
use sha2::Sha256;

use crate::bits::BitStream;
use crate::config::{parse_bool, parse_value, Configurable};
use crate::error::{Error, Result};
use crate::pnm::Image;

type Aes256Ctr = ctr::Ctr128BE<aes::Aes256>;
type HmacSha256 = Hmac<Sha256>;

pub const MAGIC: &[u8; 8] = b"MTRNGENC";
pub const VERSION: u8 = 1;
pub const NONCE_LEN: usize = 16;
pub const TAG_LEN: usize = 32;
pub const KEY_BITS: usize = 256;
/// Magic, version, nonce and length field.
pub const HEADER_LEN: usize = 8 + 1 + NONCE_LEN + 8;
/// Bits per uniform deviate.
pub const DEVIATE_BITS: usize = 53;

/// Hands out bits strictly once, in order.
#[derive(Debug, Clone)]
pub struct EntropyPool {
    source: BitStream,
    consumed: usize,
}

impl EntropyPool {
    pub fn new(source: BitStream) -> Self {
        EntropyPool { source, consumed: 0 }
    }

    pub fn consumed(&self) -> usize {
        self.consumed
    }

    pub fn remaining(&self) -> usize {
        self.source.len() - self.consumed
    }

    fn reserve(&mut self, n: usize) -> Result<usize> {
        if n > self.remaining() {
            return Err(Error::PoolExhausted { requested: n, available: self.remaining() });
        }
        let start = self.consumed;
        self.consumed += n;
        Ok(start)
    }

    pub fn take(&mut self, n: usize) -> Result<BitStream> {
        let start = self.reserve(n)?;
        Ok(self.source.slice(start, n))
    }

    /// Next `n ≤ 64` bits as a big-endian integer.
    pub fn take_u64(&mut self, n: usize) -> Result<u64> {
        assert!(n <= 64);
        let start = self.reserve(n)?;
        Ok((start..start + n).fold(0u64, |v, i| (v << 1) | u64::from(self.source.get(i))))
    }

    pub fn take_bytes(&mut self, n: usize) -> Result<Vec<u8>> {
        Ok(self.take(8 * n)?.into_bytes())
    }
}

/// Draws `length` characters uniformly from `charset` by rejection: each
/// draw reads `⌈log₂|charset|⌉` bits and values past the end are redrawn.
pub fn otp(pool: &mut EntropyPool, length: usize, charset: &[char]) -> Result<String> {
    if charset.len() < 2 {
        return Err(Error::param("charset", "needs at least 2 symbols"));
    }
    let bits = (usize::BITS - (charset.len() - 1).leading_zeros()) as usize;
    let mut out = String::with_capacity(length);
    while out.chars().count() < length {
        let v = pool.take_u64(bits)? as usize;
        if v < charset.len() {
            out.push(charset[v]);
        }
    }
    Ok(out)
}

pub const ALPHANUMERIC: &str = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";

/// The next `key_bits` pool bits as key bytes.
pub fn derive_key(pool: &mut EntropyPool, key_bits: usize) -> Result<Vec<u8>> {
    if key_bits == 0 || key_bits % 8 != 0 {
        return Err(Error::param("key_bits", "must be a positive multiple of 8"));
    }
    pool.take_bytes(key_bits / 8)
}

/// Cipher and authentication keys for one envelope.
#[derive(Clone, PartialEq, Eq)]
pub struct KeyMaterial {
    pub enc_key: [u8; 32],
    pub mac_key: [u8; 32],
}

impl std::fmt::Debug for KeyMaterial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("KeyMaterial(..)")
    }
}

impl KeyMaterial {
    pub fn to_bytes(&self) -> [u8; 64] {
        let mut out = [0u8; 64];
        out[..32].copy_from_slice(&self.enc_key);
        out[32..].copy_from_slice(&self.mac_key);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != 64 {
            return Err(Error::Format(format!("key file must be 64 bytes, found {}", bytes.len())));
        }
        let mut k = KeyMaterial { enc_key: [0; 32], mac_key: [0; 32] };
        k.enc_key.copy_from_slice(&bytes[..32]);
        k.mac_key.copy_from_slice(&bytes[32..]);
        Ok(k)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CipherEnvelope {
    pub version: u8,
    pub nonce: [u8; NONCE_LEN],
    pub ciphertext: Vec<u8>,
    pub tag: [u8; TAG_LEN],
}

impl CipherEnvelope {
    fn authenticated_prefix(version: u8, nonce: &[u8; NONCE_LEN], ciphertext: &[u8]) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + ciphertext.len() + TAG_LEN);
        out.extend_from_slice(MAGIC);
        out.push(version);
        out.extend_from_slice(nonce);
        out.extend_from_slice(&(ciphertext.len() as u64).to_be_bytes());
        out.extend_from_slice(ciphertext);
        out
    }

    /// Builds and tags an envelope; exposed so other versions can be minted.
    pub fn seal(version: u8, nonce: [u8; NONCE_LEN], ciphertext: Vec<u8>, mac_key: &[u8; 32]) -> Self {
        let prefix = Self::authenticated_prefix(version, &nonce, &ciphertext);
        let mut mac = HmacSha256::new_from_slice(mac_key).expect("any key length");
        mac.update(&prefix);
        let tag = mac.finalize().into_bytes().into();
        CipherEnvelope { version, nonce, ciphertext, tag }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Self::authenticated_prefix(self.version, &self.nonce, &self.ciphertext);
        out.extend_from_slice(&self.tag);
        out
    }
}

fn apply_keystream(key: &[u8; 32], nonce: &[u8; NONCE_LEN], data: &mut [u8]) {
    Aes256Ctr::new(key.into(), nonce.into()).apply_keystream(data);
}

/// AES-256-CTR then HMAC-SHA256 over every byte before the tag. Pool bits
/// are consumed as cipher key, MAC key, then nonce.
pub fn encrypt(plaintext: &[u8], pool: &mut EntropyPool) -> Result<(CipherEnvelope, KeyMaterial)> {
    let need = 2 * KEY_BITS + 8 * NONCE_LEN;
    if pool.remaining() < need {
        return Err(Error::PoolExhausted { requested: need, available: pool.remaining() });
    }
    let mut keys = KeyMaterial { enc_key: [0; 32], mac_key: [0; 32] };
    keys.enc_key.copy_from_slice(&derive_key(pool, KEY_BITS)?);
    keys.mac_key.copy_from_slice(&derive_key(pool, KEY_BITS)?);
    let mut nonce = [0u8; NONCE_LEN];
    nonce.copy_from_slice(&pool.take_bytes(NONCE_LEN)?);
    let mut ciphertext = plaintext.to_vec();
    apply_keystream(&keys.enc_key, &nonce, &mut ciphertext);
    Ok((CipherEnvelope::seal(VERSION, nonce, ciphertext, &keys.mac_key), keys))
}

/// Verifies the tag before looking at any other field, so a modified
/// envelope (or a wrong key) is always an authentication failure.
pub fn decrypt(envelope: &[u8], keys: &KeyMaterial) -> Result<Vec<u8>> {
    if envelope.len() < HEADER_LEN + TAG_LEN {
        return Err(Error::Format(format!("envelope of {} bytes is shorter than the {}-byte minimum", envelope.len(), HEADER_LEN + TAG_LEN)));
    }
    let (body, tag) = envelope.split_at(envelope.len() - TAG_LEN);
    let mut mac = HmacSha256::new_from_slice(&keys.mac_key).expect("any key length");
    mac.update(body);
    mac.verify_slice(tag).map_err(|_| Error::Authentication)?;
    if &body[..8] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = body[8];
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let nonce: [u8; NONCE_LEN] = body[9..9 + NONCE_LEN].try_into().expect("fixed slice");
    let declared = u64::from_be_bytes(body[9 + NONCE_LEN..HEADER_LEN].try_into().expect("fixed slice"));
    let mut plaintext = body[HEADER_LEN..].to_vec();
    if declared != plaintext.len() as u64 {
        return Err(Error::Format(format!("length field says {declared} bytes, envelope holds {}", plaintext.len())));
    }
    apply_keystream(&keys.enc_key, &nonce, &mut plaintext);
    Ok(plaintext)
}

/// Laplace mechanism settings, configurable under `dp.`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbConfig {
    pub epsilon: f64,
    pub sensitivity: f64,
    pub clip: bool,
}

impl Default for PerturbConfig {
    fn default() -> Self {
        PerturbConfig { epsilon: 1.0, sensitivity: 1.0, clip: true }
    }
}

impl PerturbConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::param("epsilon", "must be positive and finite"));
        }
        if !(self.sensitivity > 0.0) || !self.sensitivity.is_finite() {
            return Err(Error::param("sensitivity", "must be positive and finite"));
        }
        Ok(())
    }

    pub fn scale(&self) -> f64 {
        self.sensitivity / self.epsilon
    }

    pub fn key_values(&self) -> Vec<(&'static str, String)> {
        vec![
            ("epsilon", format!("{:e}", self.epsilon)),
            ("sensitivity", format!("{:e}", self.sensitivity)),
            ("clip", self.clip.to_string()),
        ]
    }
}

impl Configurable for PerturbConfig {
    fn set_key(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "epsilon" => self.epsilon = parse_value(key, value)?,
            "sensitivity" => self.sensitivity = parse_value(key, value)?,
            "clip" => self.clip = parse_bool(key, value)?,
            _ => return Err(Error::UnknownKey(key.to_string())),
        }
        Ok(())
    }
}

/// `u = (m + ½)/2⁵³ − ½` from 53 big-endian pool bits; never 0 or ±½.
pub fn centered_uniform(pool: &mut EntropyPool) -> Result<f64> {
    let m = pool.take_u64(DEVIATE_BITS)? as i64;
    // the odd numerator has at most 53 significant bits, so this is exact
    let odd = 2 * (m - (1i64 << (DEVIATE_BITS - 1))) + 1;
    Ok(odd as f64 / (1u64 << (DEVIATE_BITS + 1)) as f64)
}

/// `n` Laplace(0, scale) deviates by inverse CDF.
pub fn laplace_noise(pool: &mut EntropyPool, scale: f64, n: usize) -> Result<Vec<f64>> {
    let need = n * DEVIATE_BITS;
    if pool.remaining() < need {
        return Err(Error::PoolExhausted { requested: need, available: pool.remaining() });
    }
    (0..n)
        .map(|_| {
            let u = centered_uniform(pool)?;
            Ok(-scale * u.signum() * (-2.0 * u.abs()).ln_1p())
        })
        .collect()
}

/// Adds independent Laplace(0, Δ/ε) noise to every sample.
pub fn dp_perturb(image: &Image, cfg: &PerturbConfig, pool: &mut EntropyPool) -> Result<Image> {
    cfg.validate()?;
    let noise = laplace_noise(pool, cfg.scale(), image.len())?;
    let data = image
        .data
        .iter()
        .zip(noise)
        .map(|(&v, e)| if cfg.clip { (v + e).clamp(0.0, 1.0) } else { v + e })
        .collect();
    Ok(Image { data, ..image.clone() })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PerturbReport {
    pub mae: f64,
    /// Peak 1; infinite for identical images.
    pub psnr: f64,
}

pub fn perturbation_report(original: &Image, perturbed: &Image) -> Result<PerturbReport> {
    if (original.width, original.height, original.channels) != (perturbed.width, perturbed.height, perturbed.channels) {
        return Err(Error::Domain("images differ in shape".into()));
    }
    if original.is_empty() {
        return Err(Error::InsufficientData("empty image".into()));
    }
    let n = original.len() as f64;
    let (mut abs, mut sq) = (0.0, 0.0);
    for (a, b) in original.data.iter().zip(&perturbed.data) {
        let d = a - b;
        abs += d.abs();
        sq += d * d;
    }
    let mse = sq / n;
    let psnr = if mse == 0.0 { f64::INFINITY } else { -10.0 * mse.log10() };
    Ok(PerturbReport { mae: abs / n, psnr })
}
