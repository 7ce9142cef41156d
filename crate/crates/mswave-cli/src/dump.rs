//! Binary field dumps.
//!
//! Layout, little endian: 16-byte magic `MSSCATTER-FLD\0\0\0`, `u32` n,
//! `f64` L, `u8` kind, then the samples as `f64` in grid order (z fastest).
//! Kind 0 is a complex scalar stored as interleaved (re, im); kind 1 is a
//! real vector stored component by component.

use mswave::spectral::{ScalarField, SpectralGrid, VectorField};
use num_complex::Complex64;
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

pub const MAGIC: &[u8; 16] = b"MSSCATTER-FLD\0\0\0";
const HEADER: usize = 16 + 4 + 8 + 1;

#[derive(Debug, Error)]
pub enum DumpError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    Format { path: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Kind {
    Complex = 0,
    Vector = 1,
}

pub enum Field {
    Scalar(ScalarField),
    Vector(VectorField),
}

pub fn encode_scalar(f: &ScalarField) -> Vec<u8> {
    let mut out = header(f.grid, Kind::Complex);
    for v in &f.values {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

pub fn encode_vector(f: &VectorField) -> Vec<u8> {
    let mut out = header(f.grid, Kind::Vector);
    for c in &f.comps {
        for v in c {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn header(grid: SpectralGrid, kind: Kind) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER + grid.len() * 24);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    out.extend_from_slice(&grid.length().to_le_bytes());
    out.push(kind as u8);
    out
}

pub fn decode(bytes: &[u8], path: &str) -> Result<Field, DumpError> {
    let bad = |reason: String| DumpError::Format {
        path: path.to_string(),
        reason,
    };
    if bytes.len() < HEADER || &bytes[..16] != MAGIC {
        return Err(bad("not a field dump (bad magic)".into()));
    }
    let n = u32::from_le_bytes(bytes[16..20].try_into().unwrap()) as usize;
    let length = f64::from_le_bytes(bytes[20..28].try_into().unwrap());
    let grid = SpectralGrid::new(n, length).map_err(|e| bad(e.to_string()))?;
    let per = match bytes[28] {
        0 => 2,
        1 => 3,
        k => return Err(bad(format!("unknown field kind {k}"))),
    };
    let body = &bytes[HEADER..];
    if body.len() != per * grid.len() * 8 {
        return Err(bad(format!(
            "expected {} data bytes for n = {n}, found {}",
            per * grid.len() * 8,
            body.len()
        )));
    }
    let vals: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if let Some(i) = vals.iter().position(|v| !v.is_finite()) {
        return Err(bad(format!("non-finite sample at {i}")));
    }
    Ok(if per == 2 {
        let values = vals
            .chunks_exact(2)
            .map(|p| Complex64::new(p[0], p[1]))
            .collect();
        Field::Scalar(ScalarField::new(grid, values).map_err(|e| bad(e.to_string()))?)
    } else {
        let g = grid.len();
        let comps = [
            vals[..g].to_vec(),
            vals[g..2 * g].to_vec(),
            vals[2 * g..].to_vec(),
        ];
        Field::Vector(VectorField::new(grid, comps).map_err(|e| bad(e.to_string()))?)
    })
}

pub fn write(path: &Path, bytes: &[u8]) -> Result<(), DumpError> {
    let io = |source| DumpError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut f = std::fs::File::create(path).map_err(io)?;
    f.write_all(bytes).map_err(io)
}

pub fn read(path: &Path) -> Result<Field, DumpError> {
    let io = |source| DumpError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .map_err(io)?
        .read_to_end(&mut bytes)
        .map_err(io)?;
    decode(&bytes, &path.display().to_string())
}

pub fn read_scalar(path: &Path) -> Result<ScalarField, DumpError> {
    match read(path)? {
        Field::Scalar(f) => Ok(f),
        Field::Vector(_) => Err(DumpError::Format {
            path: path.display().to_string(),
            reason: "expected a complex scalar field".into(),
        }),
    }
}
