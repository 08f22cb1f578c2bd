//! Portable float map (grayscale `Pf`) reading and writing.
//!
//! Files are written with scale `-1.0` (little-endian) and rows bottom-up.
//! Invalid disparities are stored as NaN.

use std::fs;
use std::path::Path;

use crate::disparity::DisparityMap;
use crate::error::{Error, Result};

/// Encodes a map as a little-endian `Pf` file.
pub fn encode(dm: &DisparityMap) -> Vec<u8> {
    let (w, h) = (dm.width(), dm.height());
    let mut out = format!("Pf\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(w * h * 4);
    for y in (0..h).rev() {
        for x in 0..w {
            let v = dm.get(x, y).map_or(f32::NAN, |v| v as f32);
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

/// Raw `f32` samples in top-down row order, plus dimensions.
pub fn decode_raw(bytes: &[u8]) -> Result<(usize, usize, Vec<f32>)> {
    let mut tokens: Vec<String> = Vec::with_capacity(4);
    let mut pos = 0usize;
    while tokens.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Pfm("truncated header".into()));
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    // Exactly one whitespace byte separates the header from the data.
    pos += 1;
    match tokens[0].as_str() {
        "Pf" => {}
        "PF" => return Err(Error::Pfm("color PFM is not a disparity map".into())),
        other => return Err(Error::Pfm(format!("bad magic {other:?}"))),
    }
    let parse_dim = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::Pfm(format!("bad dimension {s:?}")))
    };
    let w = parse_dim(&tokens[1])?;
    let h = parse_dim(&tokens[2])?;
    let scale: f32 = tokens[3]
        .parse()
        .map_err(|_| Error::Pfm(format!("bad scale {:?}", tokens[3])))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::Pfm(format!("bad scale {scale}")));
    }
    let little = scale < 0.0;
    let need = w * h * 4;
    if bytes.len() < pos + need {
        return Err(Error::Pfm(format!(
            "expected {need} data bytes, found {}",
            bytes.len().saturating_sub(pos)
        )));
    }
    let data = &bytes[pos..pos + need];
    let mut values = vec![0f32; w * h];
    for (i, chunk) in data.chunks_exact(4).enumerate() {
        let b = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little { f32::from_le_bytes(b) } else { f32::from_be_bytes(b) };
        let (row, x) = (i / w, i % w);
        values[(h - 1 - row) * w + x] = v;
    }
    Ok((w, h, values))
}

pub fn decode(bytes: &[u8]) -> Result<DisparityMap> {
    let (w, h, values) = decode_raw(bytes)?;
    DisparityMap::from_values(w, h, values.into_iter().map(f64::from).collect())
}

pub fn write_pfm(path: impl AsRef<Path>, dm: &DisparityMap) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(dm)).map_err(|e| Error::io(path, e))
}

pub fn read_pfm(path: impl AsRef<Path>) -> Result<DisparityMap> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}
