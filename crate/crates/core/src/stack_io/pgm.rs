//! Binary PGM (P5) decoding and encoding, maxval 255 or 65535.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct PgmRaster {
    pub width: usize,
    pub height: usize,
    pub bit_depth: u8,
    pub samples: Vec<u16>,
}

struct HeaderCursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while self.pos < self.data.len() {
            match self.data[self.pos] {
                b'#' => {
                    while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b' ' | b'\t' | b'\n' | b'\r' | 0x0b | 0x0c => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::UnsupportedFormat(format!("PGM header: missing {what}")));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::UnsupportedFormat(format!("PGM header: bad {what}")))
    }
}

pub(crate) fn decode(data: &[u8]) -> Result<PgmRaster> {
    if data.len() < 2 || &data[..2] != b"P5" {
        return Err(Error::UnsupportedFormat("not a binary PGM".into()));
    }
    let mut cur = HeaderCursor { data, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    // exactly one whitespace byte separates the header from the raster
    if cur.pos >= data.len() || !data[cur.pos].is_ascii_whitespace() {
        return Err(Error::UnsupportedFormat("PGM header: missing raster separator".into()));
    }
    cur.pos += 1;

    let bit_depth = match maxval {
        255 => 8,
        65535 => 16,
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "PGM maxval {other} (only 255 and 65535 are accepted)"
            )))
        }
    };
    let count = width
        .checked_mul(height)
        .ok_or_else(|| Error::UnsupportedFormat("PGM dimensions overflow".into()))?;
    let bytes_per_sample = usize::from(bit_depth / 8);
    let raster = &data[cur.pos..];
    if raster.len() < count * bytes_per_sample {
        return Err(Error::UnsupportedFormat(format!(
            "PGM raster truncated: expected {} bytes, found {}",
            count * bytes_per_sample,
            raster.len()
        )));
    }
    let samples = if bit_depth == 8 {
        raster[..count].iter().map(|&v| u16::from(v)).collect()
    } else {
        raster[..count * 2]
            .chunks_exact(2)
            .map(|b| u16::from_be_bytes([b[0], b[1]]))
            .collect()
    };
    Ok(PgmRaster {
        width,
        height,
        bit_depth,
        samples,
    })
}

pub(crate) fn encode(width: usize, height: usize, bit_depth: u8, samples: &[u16]) -> Vec<u8> {
    debug_assert_eq!(samples.len(), width * height);
    let maxval = if bit_depth == 8 { 255 } else { 65535 };
    let mut out = format!("P5\n{width} {height}\n{maxval}\n").into_bytes();
    if bit_depth == 8 {
        out.extend(samples.iter().map(|&v| v as u8));
    } else {
        out.reserve(samples.len() * 2);
        for &v in samples {
            out.extend_from_slice(&v.to_be_bytes());
        }
    }
    out
}
