//! On-disk representations of grid functions.
//!
//! Binary layout, all little-endian:
//!
//! ```text
//! offset  size  field
//! 0       8     magic b"KCGRID01"
//! 8       4     dimension (u32)
//! 12      4     M (u32)
//! 16      16·N  samples as (re: f64, im: f64), row-major, N = M^dimension
//! ```
//!
//! The JSON fixture form `{"dimension": d, "M": m, "samples": [[re, im], …]}`
//! is meant for small hand-written cases.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use kclose_core::{Complex64, GridDomain, GridFunction};
use serde::{Deserialize, Serialize};

pub const MAGIC: &[u8; 8] = b"KCGRID01";
pub const HEADER_LEN: usize = 16;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic, not a grid file")]
    BadMagic,
    #[error("truncated grid file: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("grid: {0}")]
    Grid(#[from] kclose_core::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub fn encode(f: &GridFunction) -> Vec<u8> {
    let d = f.domain();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * f.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(d.dimension() as u32).to_le_bytes());
    out.extend_from_slice(&(d.size() as u32).to_le_bytes());
    for z in f.samples() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<GridFunction, FormatError> {
    if bytes.len() < HEADER_LEN {
        return Err(FormatError::Truncated {
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    if &bytes[..8] != MAGIC {
        return Err(FormatError::BadMagic);
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    let domain = GridDomain::new(word(8), word(12))?;
    let expected = HEADER_LEN + 16 * domain.len();
    if bytes.len() != expected {
        return Err(FormatError::Truncated {
            expected,
            found: bytes.len(),
        });
    }
    let samples = bytes[HEADER_LEN..]
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Ok(GridFunction::new(domain, samples)?)
}

pub fn write_grid(path: &Path, f: &GridFunction) -> Result<(), FormatError> {
    let mut file = fs::File::create(path)?;
    file.write_all(&encode(f))?;
    Ok(())
}

pub fn read_grid(path: &Path) -> Result<GridFunction, FormatError> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFixture {
    pub dimension: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub samples: Vec<[f64; 2]>,
}

impl GridFixture {
    pub fn from_grid(f: &GridFunction) -> Self {
        Self {
            dimension: f.domain().dimension(),
            m: f.domain().size(),
            samples: f.samples().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_grid(&self) -> Result<GridFunction, FormatError> {
        let domain = GridDomain::new(self.dimension, self.m)?;
        let samples = self.samples.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
        Ok(GridFunction::new(domain, samples)?)
    }
}

pub fn read_fixture(path: &Path) -> Result<GridFunction, FormatError> {
    let fx: GridFixture = serde_json::from_slice(&fs::read(path)?)?;
    fx.to_grid()
}
