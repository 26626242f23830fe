//! Netpbm greyscale (PGM) reader, plain `P2` and binary `P5`, 8 or 16 bit.

use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub max_value: u16,
    /// Raw sample values, row-major.
    pub samples: Vec<u16>,
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<Pgm> {
    let path = path.as_ref();
    let bytes = std::fs::read(path)
        .map_err(|e| Error::Image(format!("cannot read {}: {e}", path.display())))?;
    parse_pgm(&bytes)
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn token(&mut self) -> Result<&str> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Image("unexpected end of PGM data".into()));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .map_err(|_| Error::Image("non-ASCII PGM header".into()))
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        let tok = self.token()?;
        tok.parse()
            .map_err(|_| Error::Image(format!("bad PGM {what}: `{tok}`")))
    }
}

pub fn parse_pgm(bytes: &[u8]) -> Result<Pgm> {
    let mut h = Header { bytes, pos: 0 };
    let magic = h.token()?.to_owned();
    let binary = match magic.as_str() {
        "P2" => false,
        "P5" => true,
        other => return Err(Error::Image(format!("not a PGM file (magic `{other}`)"))),
    };
    let width = h.number("width")?;
    let height = h.number("height")?;
    let max_value = h.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::Image("PGM dimensions must be positive".into()));
    }
    if max_value == 0 || max_value > u16::MAX as usize {
        return Err(Error::Image(format!("PGM maxval {max_value} out of range")));
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| Error::Image("PGM dimensions overflow".into()))?;

    let samples = if binary {
        // exactly one whitespace byte separates the header from the raster
        let start = h.pos + 1;
        let wide = max_value > 255;
        let need = n * if wide { 2 } else { 1 };
        let raster = bytes
            .get(start..start + need)
            .ok_or_else(|| Error::Image("truncated P5 raster".into()))?;
        if wide {
            raster.chunks_exact(2).map(|b| u16::from_be_bytes([b[0], b[1]])).collect()
        } else {
            raster.iter().map(|&b| b as u16).collect()
        }
    } else {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push(h.number("sample")? as u16);
        }
        out
    };
    if let Some(bad) = samples.iter().find(|&&s| s as usize > max_value) {
        return Err(Error::Image(format!("PGM sample {bad} exceeds maxval {max_value}")));
    }
    Ok(Pgm { width, height, max_value: max_value as u16, samples })
}
