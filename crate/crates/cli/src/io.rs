//! CSV and JSON files on disk.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const MEASUREMENT_HEADER: [&str; 4] = ["trial", "subcarrier", "mode", "value"];

/// Seventeen significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct OutDir {
    dir: PathBuf,
}

impl OutDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn csv<I>(&self, name: &str, header: &[&str], rows: I) -> Result<PathBuf, CliError>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let path = self.path(name);
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(&path)
            .map_err(|e| CliError::Other(format!("{}: {e}", path.display())))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Other(format!("{name}: {e}")))?;
        text.push('\n');
        self.text(name, &text)
    }

    pub fn text(&self, name: &str, text: &str) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    X,
    P,
}

#[derive(Debug, Clone, Deserialize)]
struct RawRow {
    trial: u64,
    subcarrier: usize,
    mode: String,
    value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub trial: u64,
    pub subcarrier: usize,
    pub quadrature: Quadrature,
    pub value: f64,
}

fn quadrature(mode: &str) -> Option<Quadrature> {
    match mode {
        "homodyne-x" | "heterodyne-x" => Some(Quadrature::X),
        "homodyne-p" | "heterodyne-p" => Some(Quadrature::P),
        _ => None,
    }
}

/// Reads a "trial,subcarrier,mode,value" file; an empty or malformed file is
/// a validation error.
pub fn read_measurements(path: &Path) -> Result<Vec<Row>, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let header = r.headers()?.clone();
    if header.iter().ne(MEASUREMENT_HEADER) {
        return Err(CliError::Validation(format!(
            "input {}: header must be \"{}\"",
            path.display(),
            MEASUREMENT_HEADER.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (line, rec) in r.deserialize::<RawRow>().enumerate() {
        let raw = rec?;
        let q = quadrature(&raw.mode).ok_or_else(|| {
            CliError::Validation(format!("input row {}: unknown mode '{}'", line + 1, raw.mode))
        })?;
        if !raw.value.is_finite() {
            return Err(CliError::Validation(format!("input row {}: value is not finite", line + 1)));
        }
        rows.push(Row {
            trial: raw.trial,
            subcarrier: raw.subcarrier,
            quadrature: q,
            value: raw.value,
        });
    }
    if rows.is_empty() {
        return Err(CliError::Validation(format!("input {}: no data rows", path.display())));
    }
    Ok(rows)
}

/// Received subcarriers of user 0 in one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub trial: u64,
    /// `x + i p`, with a missing quadrature read as zero.
    pub values: Vec<Complex64>,
    /// The x values, or p when only p was measured.
    pub primary: Vec<f64>,
}

/// Subcarrier values of one quadrature, `None` until seen.
type Partial = Vec<Option<f64>>;

/// Splits rows into per-trial traces of user 0, subcarriers `0..n`.
///
/// Every trial must cover all `n` subcarriers in one quadrature at least, and
/// no index may reach `users·n`.
pub fn user0_traces(rows: &[Row], n: usize, users: usize) -> Result<Vec<Trace>, CliError> {
    let mut by_trial: BTreeMap<u64, (Partial, Partial)> = BTreeMap::new();
    for row in rows {
        if row.subcarrier >= users * n {
            return Err(CliError::Validation(format!(
                "input: subcarrier {} is beyond K·n = {}",
                row.subcarrier,
                users * n
            )));
        }
        if row.subcarrier >= n {
            continue;
        }
        let (x, p) = by_trial
            .entry(row.trial)
            .or_insert_with(|| (vec![None; n], vec![None; n]));
        let slot = match row.quadrature {
            Quadrature::X => &mut x[row.subcarrier],
            Quadrature::P => &mut p[row.subcarrier],
        };
        if slot.replace(row.value).is_some() {
            return Err(CliError::Validation(format!(
                "input: trial {} subcarrier {} appears twice",
                row.trial, row.subcarrier
            )));
        }
    }
    if by_trial.is_empty() {
        return Err(CliError::Validation("input: no rows for user 0".into()));
    }
    by_trial
        .into_iter()
        .map(|(trial, (x, p))| {
            let has_x = x.iter().any(Option::is_some);
            let primary_src = if has_x { &x } else { &p };
            let primary = primary_src
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    v.ok_or_else(|| {
                        CliError::Validation(format!(
                            "input: trial {trial} is missing subcarrier {j} of n = {n}"
                        ))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let values = x
                .iter()
                .zip(&p)
                .map(|(a, b)| Complex64::new(a.unwrap_or(0.0), b.unwrap_or(0.0)))
                .collect();
            Ok(Trace {
                trial,
                values,
                primary,
            })
        })
        .collect()
}

/// All primary-quadrature values ordered by trial, then subcarrier.
pub fn primary_sequence(rows: &[Row]) -> Vec<f64> {
    let has_x = rows.iter().any(|r| r.quadrature == Quadrature::X);
    let want = if has_x { Quadrature::X } else { Quadrature::P };
    let ordered: BTreeMap<(u64, usize), f64> = rows
        .iter()
        .filter(|r| r.quadrature == want)
        .map(|r| ((r.trial, r.subcarrier), r.value))
        .collect();
    ordered.into_values().collect()
}
