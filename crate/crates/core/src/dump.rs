//! Binary trajectory dumps.
//!
//! Layout (version 1):
//!
//! 1. one line of JSON terminated by `\n`:
//!    `{"format":"cylwalk-trajectory","version":1,"d":…,"N":…,"seed":…,"replica":…}`;
//! 2. then one 16-byte little-endian record per step:
//!    `u64` step index, `u32` packed torus cell, `i32` height.
//!
//! The packed cell is `Σ_i x_i N^i` over the torus coordinates `x_0, …, x_{d−1}`.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Site;

pub const FORMAT: &str = "cylwalk-trajectory";
pub const VERSION: u32 = 1;
const RECORD: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DumpHeader {
    pub format: String,
    pub version: u32,
    pub d: usize,
    #[serde(rename = "N")]
    pub side: u32,
    pub seed: u64,
    pub replica: u64,
}

impl DumpHeader {
    pub fn new(d: usize, side: u32, seed: u64, replica: u64) -> Self {
        Self {
            format: FORMAT.into(),
            version: VERSION,
            d,
            side,
            seed,
            replica,
        }
    }
}

#[derive(Debug, Error)]
pub enum DumpError {
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("malformed header: {0}")]
    Header(#[from] serde_json::Error),
    #[error("unsupported dump {format:?} version {version}")]
    Version { format: String, version: u32 },
    #[error("trailing {0} bytes do not form a record")]
    Truncated(usize),
}

pub fn write_dump<W: Write>(mut out: W, header: &DumpHeader, path: &[Site]) -> Result<(), DumpError> {
    serde_json::to_writer(&mut out, header)?;
    out.write_all(b"\n")?;
    for (n, s) in path.iter().enumerate() {
        let mut rec = [0u8; RECORD];
        rec[..8].copy_from_slice(&(n as u64).to_le_bytes());
        rec[8..12].copy_from_slice(&s.cell.to_le_bytes());
        rec[12..].copy_from_slice(&s.z.to_le_bytes());
        out.write_all(&rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_dump<R: BufRead>(mut input: R) -> Result<(DumpHeader, Vec<(u64, Site)>), DumpError> {
    let mut line = String::new();
    input.read_line(&mut line)?;
    let header: DumpHeader = serde_json::from_str(line.trim_end())?;
    if header.format != FORMAT || header.version != VERSION {
        return Err(DumpError::Version {
            format: header.format,
            version: header.version,
        });
    }
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let rest = bytes.len() % RECORD;
    if rest != 0 {
        return Err(DumpError::Truncated(rest));
    }
    let records = bytes
        .chunks_exact(RECORD)
        .map(|r| {
            let n = u64::from_le_bytes(r[..8].try_into().expect("8 bytes"));
            let cell = u32::from_le_bytes(r[8..12].try_into().expect("4 bytes"));
            let z = i32::from_le_bytes(r[12..].try_into().expect("4 bytes"));
            (n, Site { cell, z })
        })
        .collect();
    Ok((header, records))
}
