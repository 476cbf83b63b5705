//! Raw 4D volumes: a `key = value` header next to a little-endian uint16
//! raw file in C order (t slowest, then z, y, x fastest).

use std::fs;
use std::path::Path;

use super::{to_u16_samples, Volume4D};
use crate::error::{Error, Result};
use crate::keyvalue::KeyValues;

pub(crate) const DTYPE_U16LE: &str = "uint16le";

fn positive_dim(kv: &KeyValues, key: &str) -> Result<usize> {
    let v: usize = kv.parse_required(key)?;
    if v == 0 {
        return Err(Error::InvalidHeader(format!("`{key}` must be at least 1")));
    }
    Ok(v)
}

pub fn load_volume4d(header: &Path) -> Result<Volume4D> {
    let text = fs::read_to_string(header).map_err(|e| Error::io(header, e))?;
    let kv = KeyValues::parse(&text)?;

    let nt = positive_dim(&kv, "nt")?;
    let nz = positive_dim(&kv, "nz")?;
    let ny = positive_dim(&kv, "ny")?;
    let nx = positive_dim(&kv, "nx")?;
    let dtype = kv.require("dtype")?;
    if dtype != DTYPE_U16LE {
        return Err(Error::UnsupportedFormat(format!("dtype `{dtype}`")));
    }
    let data_name = kv.require("data")?;
    let data_path = header
        .parent()
        .unwrap_or_else(|| Path::new(""))
        .join(data_name);

    let mut spacing = [1.0; 3];
    for (slot, key) in spacing.iter_mut().zip(["spacing_x", "spacing_y", "spacing_z"]) {
        if let Some(v) = kv.parse_optional::<f64>(key)? {
            *slot = v;
        }
    }

    let expected = (nt as u64) * (nz as u64) * (ny as u64) * (nx as u64) * 2;
    let actual = fs::metadata(&data_path)
        .map_err(|e| Error::io(&data_path, e))?
        .len();
    if actual != expected {
        return Err(Error::TruncatedVolume { expected, actual });
    }
    let raw = fs::read(&data_path).map_err(|e| Error::io(&data_path, e))?;
    if raw.len() as u64 != expected {
        return Err(Error::TruncatedVolume {
            expected,
            actual: raw.len() as u64,
        });
    }
    let data = raw
        .chunks_exact(2)
        .map(|b| f64::from(u16::from_le_bytes([b[0], b[1]])))
        .collect();
    Ok(Volume4D::from_raw(nx, ny, nz, nt, data)?.with_spacing(spacing))
}

/// Writes `volume` as a header plus raw uint16le file. The raw file is named
/// after the header with a `.raw` extension.
pub fn write_volume4d(volume: &Volume4D, header: &Path) -> Result<()> {
    let samples = to_u16_samples(volume.data())?;
    let data_path = header.with_extension("raw");
    let data_name = data_path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::InvalidParameter("header path must be UTF-8".into()))?
        .to_string();
    let mut raw = Vec::with_capacity(samples.len() * 2);
    for v in samples {
        raw.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(&data_path, raw).map_err(|e| Error::io(&data_path, e))?;
    let [sx, sy, sz] = volume.spacing();
    let text = format!(
        "nt = {}\nnz = {}\nny = {}\nnx = {}\ndtype = {DTYPE_U16LE}\ndata = {data_name}\n\
         spacing_x = {sx}\nspacing_y = {sy}\nspacing_z = {sz}\n",
        volume.nt(),
        volume.nz(),
        volume.ny(),
        volume.nx(),
    );
    fs::write(header, text).map_err(|e| Error::io(header, e))
}
