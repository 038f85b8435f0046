//! Portable anymap images: P1 bitmaps plus P2/P3/P5/P6 gray and color maps.

use std::fs;
use std::path::Path;

use crate::bits::BitStream;
use crate::error::{Error, Result};

/// Monochrome image, row-major, `true` = black.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bitmap {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<bool>,
}

impl Bitmap {
    /// Fills a `side × side` image row by row from the start of `bits`.
    pub fn from_bits(bits: &BitStream, side: usize) -> Result<Self> {
        let need = side * side;
        if side == 0 || bits.len() < need {
            return Err(Error::InsufficientData(format!("a {side}×{side} bitmap needs {need} bits, have {}", bits.len())));
        }
        Ok(Bitmap { width: side, height: side, pixels: bits.iter().take(need).collect() })
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.pixels[y * self.width + x]
    }

    /// Fraction of black pixels in the `w × h` tile at `(x0, y0)`.
    pub fn ones_fraction(&self, x0: usize, y0: usize, w: usize, h: usize) -> f64 {
        assert!(x0 + w <= self.width && y0 + h <= self.height && w * h > 0);
        let ones: usize = (y0..y0 + h).map(|y| (x0..x0 + w).filter(|&x| self.get(x, y)).count()).sum();
        ones as f64 / (w * h) as f64
    }

    pub fn to_pbm(&self, comment: Option<&str>) -> String {
        let mut s = String::with_capacity(self.pixels.len() * 2 + 64);
        s.push_str("P1\n");
        if let Some(c) = comment {
            for line in c.lines() {
                s.push_str("# ");
                s.push_str(line);
                s.push('\n');
            }
        }
        s.push_str(&format!("{} {}\n", self.width, self.height));
        for row in self.pixels.chunks(self.width) {
            let line: Vec<&str> = row.iter().map(|&b| if b { "1" } else { "0" }).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_pbm(text: &str) -> Result<Self> {
        let mut tok = Tokens::new(text.as_bytes());
        if tok.word()? != "P1" {
            return Err(Error::Format("not a plain PBM (P1) file".into()));
        }
        let width = tok.number()?;
        let height = tok.number()?;
        let mut pixels = Vec::with_capacity(width * height);
        while pixels.len() < width * height {
            tok.skip_space();
            match tok.next_byte() {
                Some(b'0') => pixels.push(false),
                Some(b'1') => pixels.push(true),
                Some(c) => return Err(Error::Format(format!("unexpected byte {c:#x} in bitmap data"))),
                None => return Err(Error::Format("bitmap data truncated".into())),
            }
        }
        Ok(Bitmap { width, height, pixels })
    }

    pub fn write(&self, path: &Path, comment: Option<&str>) -> Result<()> {
        fs::write(path, self.to_pbm(comment))?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PnmKind {
    /// P2
    GrayAscii,
    /// P3
    ColorAscii,
    /// P5
    GrayBinary,
    /// P6
    ColorBinary,
}

impl PnmKind {
    fn magic(self) -> &'static str {
        match self {
            PnmKind::GrayAscii => "P2",
            PnmKind::ColorAscii => "P3",
            PnmKind::GrayBinary => "P5",
            PnmKind::ColorBinary => "P6",
        }
    }

    fn channels(self) -> usize {
        match self {
            PnmKind::GrayAscii | PnmKind::GrayBinary => 1,
            PnmKind::ColorAscii | PnmKind::ColorBinary => 3,
        }
    }

    fn binary(self) -> bool {
        matches!(self, PnmKind::GrayBinary | PnmKind::ColorBinary)
    }
}

/// `height × width × channels` intensities in `[0, 1]`, interleaved row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::param("channels", "must be 1 or 3"));
        }
        if data.len() != width * height * channels {
            return Err(Error::Format(format!("{} values for a {width}×{height}×{channels} image", data.len())));
        }
        Ok(Image { width, height, channels, data })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Self {
        Image { width, height, channels, data: vec![value; width * height * channels] }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Encodes with maxval 255; values are clamped to `[0, 1]` and rounded.
    pub fn to_pnm(&self, kind: PnmKind) -> Result<Vec<u8>> {
        if kind.channels() != self.channels {
            return Err(Error::param("format", format!("{} needs {} channel(s)", kind.magic(), kind.channels())));
        }
        let levels: Vec<u8> = self.data.iter().map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8).collect();
        let mut out = format!("{}\n{} {}\n255\n", kind.magic(), self.width, self.height).into_bytes();
        if kind.binary() {
            out.extend_from_slice(&levels);
        } else {
            let row = self.width * self.channels;
            for line in levels.chunks(row.max(1)) {
                let text: Vec<String> = line.iter().map(u8::to_string).collect();
                out.extend_from_slice(text.join(" ").as_bytes());
                out.push(b'\n');
            }
        }
        Ok(out)
    }

    pub fn from_pnm(bytes: &[u8]) -> Result<Self> {
        let mut tok = Tokens::new(bytes);
        let kind = match tok.word()?.as_str() {
            "P2" => PnmKind::GrayAscii,
            "P3" => PnmKind::ColorAscii,
            "P5" => PnmKind::GrayBinary,
            "P6" => PnmKind::ColorBinary,
            other => return Err(Error::Format(format!("unsupported image type {other:?}"))),
        };
        let width = tok.number()?;
        let height = tok.number()?;
        let maxval = tok.number()?;
        if maxval == 0 || maxval > 65535 {
            return Err(Error::Format(format!("maxval {maxval} outside 1..=65535")));
        }
        let n = width * height * kind.channels();
        let scale = maxval as f64;
        let mut data = Vec::with_capacity(n);
        if kind.binary() {
            // exactly one whitespace byte separates the header from the raster
            tok.next_byte();
            let raster = &bytes[tok.pos..];
            let wide = maxval > 255;
            let need = if wide { 2 * n } else { n };
            if raster.len() < need {
                return Err(Error::Format("image raster truncated".into()));
            }
            if wide {
                data.extend(raster[..need].chunks_exact(2).map(|c| f64::from(u16::from_be_bytes([c[0], c[1]])) / scale));
            } else {
                data.extend(raster[..need].iter().map(|&b| f64::from(b) / scale));
            }
        } else {
            for _ in 0..n {
                let v = tok.number()?;
                if v > maxval {
                    return Err(Error::Format(format!("sample {v} exceeds maxval {maxval}")));
                }
                data.push(v as f64 / scale);
            }
        }
        Image::new(width, height, kind.channels(), data)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Image::from_pnm(&fs::read(path)?)
    }

    pub fn write(&self, path: &Path, kind: PnmKind) -> Result<()> {
        fs::write(path, self.to_pnm(kind)?)?;
        Ok(())
    }
}

/// Header tokenizer that understands `#` comments.
struct Tokens<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Tokens { bytes, pos: 0 }
    }

    fn next_byte(&mut self) -> Option<u8> {
        let b = self.bytes.get(self.pos).copied();
        self.pos += usize::from(b.is_some());
        b
    }

    fn skip_space(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn word(&mut self) -> Result<String> {
        self.skip_space();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#') {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Format("unexpected end of header".into()));
        }
        Ok(String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned())
    }

    fn number(&mut self) -> Result<usize> {
        let w = self.word()?;
        w.parse().map_err(|_| Error::Format(format!("expected a number, found {w:?}")))
    }
}
