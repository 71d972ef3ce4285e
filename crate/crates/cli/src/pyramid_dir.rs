//! Directory layout for a transform pyramid.
//!
//! `level{j}_ch{i}.txt` holds channel `i` after level `j` (1-based); channel 0
//! is the approximation. `pyramid.json` records the bank, boundary mode and
//! original signal length so `synthesize` needs no other input.

use std::path::Path;
use std::sync::Arc;

use nband::transform::{Boundary, Level, TransformPyramid};
use nband::wavelet_construct::FilterBank;
use serde::{Deserialize, Serialize};

use crate::bank_file::{BankFile, SCHEMA_VERSION};
use crate::error::{io_error, CliError};
use crate::signal_file::{format_signal, read_signal, write_text};

pub const MANIFEST: &str = "pyramid.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema_version: u32,
    pub n: usize,
    /// `periodic` or `zero`.
    pub boundary: String,
    /// Samples before padding; synthesis output is truncated to this.
    pub original_len: usize,
    pub levels: Vec<LevelRecord>,
    pub bank: BankFile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelRecord {
    pub level: usize,
    pub input_len: usize,
    /// File name per channel, channel 0 first.
    pub channels: Vec<String>,
}

pub fn boundary_name(b: Boundary) -> &'static str {
    match b {
        Boundary::Periodic => "periodic",
        Boundary::ZeroPad => "zero",
    }
}

fn parse_boundary(s: &str) -> Result<Boundary, CliError> {
    match s {
        "periodic" => Ok(Boundary::Periodic),
        "zero" => Ok(Boundary::ZeroPad),
        other => Err(CliError::Data(format!("unknown boundary {other:?}"))),
    }
}

pub fn channel_file(level: usize, channel: usize) -> String {
    format!("level{level}_ch{channel}.txt")
}

pub fn write_pyramid(
    dir: &Path,
    p: &TransformPyramid,
    original_len: usize,
) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let mut levels = Vec::with_capacity(p.levels().len());
    for (j, level) in p.levels().iter().enumerate() {
        let mut channels = Vec::with_capacity(p.n());
        for (i, data) in std::iter::once(&level.approx)
            .chain(&level.details)
            .enumerate()
        {
            let name = channel_file(j + 1, i);
            write_text(&dir.join(&name), &format_signal(data))?;
            channels.push(name);
        }
        levels.push(LevelRecord {
            level: j + 1,
            input_len: level.input_len,
            channels,
        });
    }
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        n: p.n(),
        boundary: boundary_name(p.boundary()).into(),
        original_len,
        levels,
        bank: BankFile::from_bank(p.bank()),
    };
    write_text(&dir.join(MANIFEST), &crate::bank_file::to_json(&manifest))
}

/// Reads a pyramid; `bank` replaces the stored bank when given.
pub fn read_pyramid(
    dir: &Path,
    bank: Option<FilterBank>,
) -> Result<(TransformPyramid, usize), CliError> {
    let path = dir.join(MANIFEST);
    let text = std::fs::read_to_string(&path).map_err(|e| io_error(&path, e))?;
    let m: Manifest = serde_json::from_str(&text).map_err(|e| io_error(&path, e))?;
    if m.schema_version != SCHEMA_VERSION {
        return Err(CliError::Data(format!(
            "unsupported schema_version {}",
            m.schema_version
        )));
    }
    let bank = match bank {
        Some(b) => b,
        None => m.bank.to_bank()?,
    };
    if bank.n() != m.n {
        return Err(CliError::Usage(format!(
            "bank has N = {} but the pyramid was built with N = {}",
            bank.n(),
            m.n
        )));
    }
    let mut levels = Vec::with_capacity(m.levels.len());
    for (j, rec) in m.levels.iter().enumerate() {
        if rec.level != j + 1 || rec.channels.len() != m.n {
            return Err(CliError::Data(format!(
                "{}: malformed record for level {}",
                path.display(),
                j + 1
            )));
        }
        let mut data = rec
            .channels
            .iter()
            .map(|name| read_signal(&dir.join(name), None))
            .collect::<Result<Vec<_>, _>>()?;
        let details = data.split_off(1);
        levels.push(Level {
            input_len: rec.input_len,
            approx: data.pop().expect("channel 0 present"),
            details,
        });
    }
    let pyramid =
        TransformPyramid::from_parts(Arc::new(bank), parse_boundary(&m.boundary)?, levels)
            .map_err(|e| CliError::Data(e.to_string()))?;
    Ok((pyramid, m.original_len))
}
