//! Built-in preference matrices, hard-instance generators and CSV I/O.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::env::{validate_matrix, MatrixError, PreferenceMatrix};
use crate::Scalar;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: cannot parse `{value}` as a probability")]
    Parse {
        line: u64,
        column: usize,
        value: String,
    },
    #[error("line {line} has {found} entries, expected {expected}")]
    RowLength {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("{0}")]
    Domain(String),
    #[error("unknown dataset `{0}` (see `duelsim datasets list`)")]
    Unknown(String),
}

/// One entry of the built-in registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetInfo {
    pub name: &'static str,
    pub k: usize,
    pub origin: &'static str,
    csv: &'static str,
}

pub const BUILTIN: [DatasetInfo; 6] = [
    DatasetInfo {
        name: "six-rankers",
        k: 6,
        origin: "synthetic stand-in, not the published matrix",
        csv: include_str!("../data/six-rankers.csv"),
    },
    DatasetInfo {
        name: "mslr",
        k: 5,
        origin: "synthetic stand-in, not the published matrix",
        csv: include_str!("../data/mslr.csv"),
    },
    DatasetInfo {
        name: "tennis",
        k: 8,
        origin: "synthetic stand-in, not the published matrix",
        csv: include_str!("../data/tennis.csv"),
    },
    DatasetInfo {
        name: "arithmetic",
        k: 10,
        origin: "exact formula mu_ij = 0.5 + 0.025 (j - i)",
        csv: include_str!("../data/arithmetic10.csv"),
    },
    DatasetInfo {
        name: "car",
        k: 10,
        origin: "synthetic stand-in, not the published matrix",
        csv: include_str!("../data/car.csv"),
    },
    DatasetInfo {
        name: "sushi",
        k: 16,
        origin: "synthetic stand-in, not the published matrix",
        csv: include_str!("../data/sushi.csv"),
    },
];

/// `μ_ij = 0.5 + 0.025 (j − i)` for `2 ≤ k ≤ 21`; arm 0 wins.
pub fn arithmetic_matrix<F: Scalar>(k: usize) -> Result<PreferenceMatrix<F>, DatasetError> {
    if !(2..=21).contains(&k) {
        return Err(DatasetError::Domain(format!(
            "arithmetic matrix needs 2 <= k <= 21, got {k}"
        )));
    }
    let rows: Vec<Vec<F>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| F::of((500 + 25 * (j as i64 - i as i64)) as f64) / F::of(1000.0))
                .collect()
        })
        .collect();
    Ok(validate_matrix(&rows)?)
}

/// The two instances of the lower-bound construction.
///
/// `μ¹` has arm 0 beating every arm with probability `1/2 + Δ` and every
/// other pair tied. `μ²` additionally lets arm `k_star` beat arm 0 with
/// `1/2 + Δ` and the remaining arms with `1/2 + 2Δ`, making it the winner.
pub fn hard_instance_pair<F: Scalar>(
    k: usize,
    delta: F,
    k_star: usize,
) -> Result<(PreferenceMatrix<F>, PreferenceMatrix<F>), DatasetError> {
    if k < 3 {
        return Err(DatasetError::Domain(format!("hard instance needs k >= 3, got {k}")));
    }
    if !(delta > F::zero() && delta <= F::of(0.125)) {
        return Err(DatasetError::Domain(format!(
            "hard instance needs 0 < delta <= 1/8, got {delta}"
        )));
    }
    if k_star == 0 || k_star >= k {
        return Err(DatasetError::Domain(format!(
            "k* must be a non-winning arm in 2..={k}, got {}",
            k_star + 1
        )));
    }
    let half = F::half();
    let mut first = vec![vec![half; k]; k];
    for i in 1..k {
        first[0][i] = half + delta;
        first[i][0] = half - delta;
    }
    let mut second = first.clone();
    for i in 0..k {
        if i == k_star {
            continue;
        }
        let p = if i == 0 { half + delta } else { half + delta + delta };
        second[k_star][i] = p;
        second[i][k_star] = F::one() - p;
    }
    Ok((validate_matrix(&first)?, validate_matrix(&second)?))
}

fn parse_matrix<F: Scalar, R: std::io::Read>(reader: R) -> Result<PreferenceMatrix<F>, DatasetError> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<Vec<F>> = Vec::new();
    for record in csv.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(col, field)| {
                F::from_str_radix(field, 10).map_err(|_| DatasetError::Parse {
                    line,
                    column: col + 1,
                    value: field.to_string(),
                })
            })
            .collect::<Result<Vec<F>, _>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(DatasetError::RowLength {
                    line,
                    expected: first.len(),
                    found: row.len(),
                });
            }
        }
        rows.push(row);
    }
    Ok(validate_matrix(&rows)?)
}

/// Reads and validates a headerless `K×K` CSV matrix.
pub fn load_matrix_csv<F: Scalar>(path: impl AsRef<Path>) -> Result<PreferenceMatrix<F>, DatasetError> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_matrix(file)
}

/// Writes a matrix as headerless CSV with six decimals.
pub fn write_matrix_csv<F: Scalar, W: Write>(matrix: &PreferenceMatrix<F>, mut out: W) -> std::io::Result<()> {
    for row in matrix.rows() {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:.6}")).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Looks up a built-in dataset by name.
pub fn builtin<F: Scalar>(name: &str) -> Result<PreferenceMatrix<F>, DatasetError> {
    let info = BUILTIN
        .iter()
        .find(|d| d.name == name)
        .ok_or_else(|| DatasetError::Unknown(name.to_string()))?;
    parse_matrix(info.csv.as_bytes())
}

/// Parsed `--dataset` argument.
///
/// Accepts a built-in name, `arithmetic:K`, `hard-instance:K:DELTA` (the
/// first instance), `hard-instance:K:DELTA:ARM` (the second instance, with
/// `ARM` the 1-based index of the promoted arm), or a path to a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSpec {
    Builtin(&'static str),
    Arithmetic(usize),
    HardInstance {
        k: usize,
        delta: f64,
        k_star: Option<usize>,
    },
    File(PathBuf),
}

impl DatasetSpec {
    pub fn parse(s: &str) -> Result<Self, DatasetError> {
        if let Some(info) = BUILTIN.iter().find(|d| d.name == s) {
            return Ok(DatasetSpec::Builtin(info.name));
        }
        let bad = || DatasetError::Unknown(s.to_string());
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["arithmetic", k] => Ok(DatasetSpec::Arithmetic(k.parse().map_err(|_| bad())?)),
            ["hard-instance", k, delta, rest @ ..] if rest.len() <= 1 => {
                let k_star = match rest.first() {
                    Some(a) => Some(a.parse::<usize>().map_err(|_| bad())?),
                    None => None,
                };
                Ok(DatasetSpec::HardInstance {
                    k: k.parse().map_err(|_| bad())?,
                    delta: delta.parse().map_err(|_| bad())?,
                    k_star,
                })
            }
            _ if s.ends_with(".csv") || Path::new(s).is_file() => Ok(DatasetSpec::File(PathBuf::from(s))),
            _ => Err(bad()),
        }
    }

    pub fn load<F: Scalar>(&self) -> Result<PreferenceMatrix<F>, DatasetError> {
        match self {
            DatasetSpec::Builtin(name) => builtin(name),
            DatasetSpec::Arithmetic(k) => arithmetic_matrix(*k),
            DatasetSpec::HardInstance { k, delta, k_star } => {
                let promoted = k_star.unwrap_or(2).saturating_sub(1);
                let (first, second) = hard_instance_pair(*k, F::of(*delta), promoted)?;
                Ok(if k_star.is_some() { second } else { first })
            }
            DatasetSpec::File(path) => load_matrix_csv(path),
        }
    }
}

impl fmt::Display for DatasetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetSpec::Builtin(name) => f.write_str(name),
            DatasetSpec::Arithmetic(k) => write!(f, "arithmetic:{k}"),
            DatasetSpec::HardInstance { k, delta, k_star: None } => write!(f, "hard-instance:{k}:{delta}"),
            DatasetSpec::HardInstance { k, delta, k_star: Some(a) } => {
                write!(f, "hard-instance:{k}:{delta}:{a}")
            }
            DatasetSpec::File(path) => write!(f, "{}", path.display()),
        }
    }
}
