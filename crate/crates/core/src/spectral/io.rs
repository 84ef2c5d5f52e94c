//! Field file format: `<stem>.json` holds the header, `<stem>.bin` the
//! samples as little-endian `f64` in row-major order.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{FieldKind, Grid, RealField, VectorField};
use crate::error::{Error, Result};

pub const DTYPE: &str = "f64le";
pub const ORDER: &str = "row-major";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub dim: usize,
    pub size: usize,
    pub length: f64,
    pub kind: FieldKind,
    pub dtype: String,
    pub order: String,
}

fn with_ext(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

pub fn header_path(stem: &Path) -> PathBuf {
    with_ext(stem, "json")
}

pub fn data_path(stem: &Path) -> PathBuf {
    with_ext(stem, "bin")
}

pub fn encode_samples(samples: &[f64]) -> Vec<u8> {
    samples.iter().flat_map(|x| x.to_le_bytes()).collect()
}

pub fn decode_samples(bytes: &[u8]) -> Result<Vec<f64>> {
    if bytes.len() % 8 != 0 {
        return Err(Error::Format(format!(
            "sample payload of {} bytes is not a multiple of 8",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

pub fn write_field(stem: &Path, field: &RealField) -> Result<()> {
    let g = field.grid();
    let header = FieldHeader {
        dim: g.dim,
        size: g.size,
        length: g.length,
        kind: field.kind(),
        dtype: DTYPE.into(),
        order: ORDER.into(),
    };
    let hp = header_path(stem);
    let text = serde_json::to_string_pretty(&header).map_err(|e| Error::json(&hp, e))?;
    fs::write(&hp, text).map_err(|e| Error::io(&hp, e))?;
    let dp = data_path(stem);
    fs::write(&dp, encode_samples(field.samples())).map_err(|e| Error::io(&dp, e))
}

pub fn read_field(stem: &Path) -> Result<RealField> {
    let hp = header_path(stem);
    let text = fs::read_to_string(&hp).map_err(|e| Error::io(&hp, e))?;
    let header: FieldHeader = serde_json::from_str(&text).map_err(|e| Error::json(&hp, e))?;
    if header.dtype != DTYPE || header.order != ORDER {
        return Err(Error::Format(format!(
            "{}: unsupported dtype/order {}/{}",
            hp.display(),
            header.dtype,
            header.order
        )));
    }
    let grid = Grid::new(header.dim, header.size, header.length)?;
    let dp = data_path(stem);
    let bytes = fs::read(&dp).map_err(|e| Error::io(&dp, e))?;
    RealField::with_kind(grid, decode_samples(&bytes)?, header.kind)
}

fn component_stem(stem: &Path, axis: usize) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(format!("_c{axis}"));
    PathBuf::from(s)
}

/// Writes one field file pair per component: `<stem>_c0`, `<stem>_c1`, ...
pub fn write_vector(stem: &Path, v: &VectorField) -> Result<()> {
    for (a, c) in v.components().iter().enumerate() {
        write_field(&component_stem(stem, a), c)?;
    }
    Ok(())
}

pub fn read_vector(stem: &Path) -> Result<VectorField> {
    let first = read_field(&component_stem(stem, 0))?;
    let dim = first.grid().dim;
    let mut comps = vec![first];
    for a in 1..dim {
        comps.push(read_field(&component_stem(stem, a))?);
    }
    VectorField::new(comps)
}
