//! Packed bit sequences, MSB-first within each byte.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Binary sequence packed eight bits per byte, most significant bit first.
/// Pad bits in the final byte are always zero.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct BitStream {
    bytes: Vec<u8>,
    n_bits: usize,
}

impl BitStream {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n_bits: usize) -> Self {
        BitStream { bytes: Vec::with_capacity(n_bits.div_ceil(8)), n_bits: 0 }
    }

    /// Wraps packed bytes holding `n_bits` bits. Pad bits are cleared.
    pub fn from_bytes(mut bytes: Vec<u8>, n_bits: usize) -> Result<Self> {
        if n_bits > bytes.len() * 8 {
            return Err(Error::Format(format!(
                "{} bytes cannot hold {n_bits} bits",
                bytes.len()
            )));
        }
        bytes.truncate(n_bits.div_ceil(8));
        let rem = n_bits % 8;
        if rem != 0 {
            if let Some(last) = bytes.last_mut() {
                *last &= 0xffu8 << (8 - rem);
            }
        }
        Ok(BitStream { bytes, n_bits })
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let iter = bits.into_iter();
        let mut out = BitStream::with_capacity(iter.size_hint().0);
        for b in iter {
            out.push(b);
        }
        out
    }

    /// Parses `0`/`1` characters; whitespace is skipped.
    pub fn from_ascii(s: &str) -> Result<Self> {
        let mut out = BitStream::with_capacity(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => out.push(false),
                '1' => out.push(true),
                c if c.is_whitespace() => {}
                c => return Err(Error::Format(format!("unexpected character {c:?} at offset {i}"))),
            }
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.n_bits
    }

    pub fn is_empty(&self) -> bool {
        self.n_bits == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        let idx = self.n_bits;
        if idx % 8 == 0 {
            self.bytes.push(0);
        }
        if bit {
            self.bytes[idx / 8] |= 0x80 >> (idx % 8);
        }
        self.n_bits += 1;
    }

    #[inline]
    pub fn get(&self, idx: usize) -> bool {
        assert!(idx < self.n_bits, "bit index {idx} out of range {}", self.n_bits);
        self.bytes[idx / 8] & (0x80 >> (idx % 8)) != 0
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = bool> + ExactSizeIterator + '_ {
        (0..self.n_bits).map(move |i| self.get(i))
    }

    /// Bits as `0`/`1` bytes, the layout most statistical routines want.
    pub fn to_vec(&self) -> Vec<u8> {
        self.iter().map(u8::from).collect()
    }

    pub fn count_ones(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    /// Sub-range `[start, start+len)` as a new stream.
    pub fn slice(&self, start: usize, len: usize) -> BitStream {
        assert!(start + len <= self.n_bits);
        if start % 8 == 0 {
            let bytes = self.bytes[start / 8..(start + len).div_ceil(8)].to_vec();
            return BitStream::from_bytes(bytes, len).expect("range checked");
        }
        BitStream::from_bits((start..start + len).map(|i| self.get(i)))
    }

    pub fn reversed(&self) -> BitStream {
        BitStream::from_bits(self.iter().rev())
    }

    pub fn complemented(&self) -> BitStream {
        let bytes = self.bytes.iter().map(|b| !b).collect();
        BitStream::from_bytes(bytes, self.n_bits).expect("same length")
    }

    pub fn extend_from(&mut self, other: &BitStream) {
        if self.n_bits % 8 == 0 {
            self.bytes.extend_from_slice(&other.bytes);
            self.n_bits += other.n_bits;
        } else {
            for b in other.iter() {
                self.push(b);
            }
        }
    }

    /// One `0`/`1` character per bit with a newline after every 64 bits.
    pub fn to_ascii(&self) -> String {
        let mut s = String::with_capacity(self.n_bits + self.n_bits / 64 + 1);
        for (i, b) in self.iter().enumerate() {
            s.push(if b { '1' } else { '0' });
            if i % 64 == 63 {
                s.push('\n');
            }
        }
        if self.n_bits % 64 != 0 {
            s.push('\n');
        }
        s
    }

    pub fn sha256_hex(&self) -> String {
        sha256_hex(&self.bytes)
    }

    /// Writes the raw packed bytes to `path` and a sidecar `<path>.meta`
    /// recording the bit count and the hash of the data it was derived from.
    pub fn write_raw(&self, path: &Path, source_hash: &str) -> Result<()> {
        fs::write(path, &self.bytes)?;
        let meta = format!(
            "n_bits={}\nbit_order=msb-first\nsource_sha256={}\nsha256={}\n",
            self.n_bits,
            source_hash,
            self.sha256_hex()
        );
        fs::write(meta_path(path), meta)?;
        Ok(())
    }

    /// Reads a stream written by [`BitStream::write_raw`]. Without a sidecar
    /// every byte is taken as eight bits.
    pub fn read_raw(path: &Path) -> Result<Self> {
        let bytes = fs::read(path)?;
        let meta = meta_path(path);
        let n_bits = if meta.exists() {
            let text = fs::read_to_string(&meta)?;
            parse_meta_bits(&text)?
        } else {
            bytes.len() * 8
        };
        if n_bits.div_ceil(8) != bytes.len() {
            return Err(Error::Format(format!(
                "{} declares {n_bits} bits but data holds {} bytes",
                meta.display(),
                bytes.len()
            )));
        }
        BitStream::from_bytes(bytes, n_bits)
    }

    pub fn write_ascii(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_ascii())?;
        Ok(())
    }

    pub fn read_ascii(path: &Path) -> Result<Self> {
        BitStream::from_ascii(&fs::read_to_string(path)?)
    }
}

fn parse_meta_bits(text: &str) -> Result<usize> {
    for line in text.lines() {
        if let Some(v) = line.trim().strip_prefix("n_bits=") {
            return v
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("bad n_bits value {v:?}")));
        }
    }
    Err(Error::Format("metadata has no n_bits entry".into()))
}

pub fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

pub fn sha256_hex(data: &[u8]) -> String {
    let digest = Sha256::digest(data);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

impl fmt::Debug for BitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const SHOW: usize = 64;
        let head: String = self.iter().take(SHOW).map(|b| if b { '1' } else { '0' }).collect();
        let ellipsis = if self.n_bits > SHOW { "…" } else { "" };
        write!(f, "BitStream({} bits: {head}{ellipsis})", self.n_bits)
    }
}

impl FromIterator<bool> for BitStream {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        BitStream::from_bits(iter)
    }
}
