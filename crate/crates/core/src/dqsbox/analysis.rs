//! Row-by-row correlation and independence between two 16x16 value grids.
//!
//! Rows are standardized as `y = (x - mean) / std` with the half-range
//! centre `mean = (max - min) / 2` and `std = sqrt((max - min)^2 / 16)`.
//! A row's correlation is the normalized dot product of the two standardized
//! rows, its independence is `(1 - |corr|) * 100`. A textbook Pearson
//! coefficient is reported alongside as a cross-check.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::DqsBox;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("degenerate row: max equals min, standard deviation is zero")]
    DegenerateRow,
    #[error("grid line {line}: {reason}")]
    MalformedGrid { line: usize, reason: String },
}

/// 16x16 grid of byte values: either an S-box laid out row-major or a fixture.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct ValueGrid(pub [[u8; 16]; 16]);

impl ValueGrid {
    pub fn from_table(table: &[u8; 256]) -> Self {
        ValueGrid(core::array::from_fn(|r| core::array::from_fn(|c| table[16 * r + c])))
    }

    pub fn rows(&self) -> &[[u8; 16]; 16] {
        &self.0
    }

    pub fn max(&self) -> u8 {
        self.0.iter().flatten().copied().max().unwrap_or(0)
    }
}

impl From<&DqsBox> for ValueGrid {
    fn from(b: &DqsBox) -> Self {
        ValueGrid::from_table(b.forward())
    }
}

/// Fixture text: 16 non-empty lines of 16 hex bytes, `0x` prefix optional.
/// Blank lines and lines starting with `#` are skipped.
impl FromStr for ValueGrid {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut rows = Vec::with_capacity(16);
        for (n, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: String| AnalysisError::MalformedGrid { line: n + 1, reason };
            let vals = line
                .split_whitespace()
                .map(|tok| {
                    let digits = tok.strip_prefix("0x").or_else(|| tok.strip_prefix("0X")).unwrap_or(tok);
                    u8::from_str_radix(digits, 16).map_err(|_| err(format!("bad hex byte {tok:?}")))
                })
                .collect::<Result<Vec<u8>, _>>()?;
            let row: [u8; 16] = vals
                .try_into()
                .map_err(|v: Vec<u8>| err(format!("{} values, expected 16", v.len())))?;
            rows.push(row);
        }
        let n = rows.len();
        let rows: [[u8; 16]; 16] = rows.try_into().map_err(|_| AnalysisError::MalformedGrid {
            line: 0,
            reason: format!("{n} rows, expected 16"),
        })?;
        Ok(ValueGrid(rows))
    }
}

impl fmt::Display for ValueGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.0 {
            let line: Vec<String> = row.iter().map(|b| format!("{b:02x}")).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for ValueGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ValueGrid(\n{self})")
    }
}

pub fn standardize_row(row: &[f64; 16]) -> Result<[f64; 16], AnalysisError> {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = row.iter().copied().fold(f64::INFINITY, f64::min);
    let range = max - min;
    if range == 0.0 {
        return Err(AnalysisError::DegenerateRow);
    }
    let mean = range / 2.0;
    let std = (range * range / 16.0).sqrt();
    Ok(row.map(|x| (x - mean) / std))
}

pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    (saa > 0.0 && sbb > 0.0).then(|| sab / (saa * sbb).sqrt())
}

fn normalized_dot(a: &[f64; 16], b: &[f64; 16]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum();
    let nb: f64 = b.iter().map(|x| x * x).sum();
    (dot / (na * nb).sqrt()).clamp(-1.0, 1.0)
}

fn independence(corr: f64) -> f64 {
    (1.0 - corr.abs()) * 100.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowCorrelation {
    /// `None` when either row is constant.
    pub corr: Option<f64>,
    pub independence: Option<f64>,
    pub pearson: Option<f64>,
    pub pearson_independence: Option<f64>,
}

impl RowCorrelation {
    pub fn is_degenerate(&self) -> bool {
        self.corr.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationProfile {
    pub rows: [RowCorrelation; 16],
    /// Mean over non-degenerate rows.
    pub mean_independence: f64,
    pub mean_pearson_independence: f64,
    /// Population std of the row correlations over the maximum entry of the first grid.
    pub ratio: f64,
    /// Pearson coefficient over all 256 cells at once.
    pub pooled_pearson: Option<f64>,
}

impl CorrelationProfile {
    pub fn mean_abs_corr(&self) -> f64 {
        mean(self.rows.iter().filter_map(|r| r.corr.map(f64::abs)))
    }

    pub fn degenerate_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.is_degenerate()).count()
    }
}

fn mean(it: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = it.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

fn to_f64(row: &[u8; 16]) -> [f64; 16] {
    row.map(f64::from)
}

pub fn correlation_profile(a: &ValueGrid, b: &ValueGrid) -> CorrelationProfile {
    let rows: [RowCorrelation; 16] = core::array::from_fn(|i| {
        let (ra, rb) = (to_f64(&a.0[i]), to_f64(&b.0[i]));
        let corr = match (standardize_row(&ra), standardize_row(&rb)) {
            (Ok(ya), Ok(yb)) => Some(normalized_dot(&ya, &yb)),
            _ => None,
        };
        let pearson = pearson(&ra, &rb);
        RowCorrelation {
            corr,
            independence: corr.map(independence),
            pearson,
            pearson_independence: pearson.map(independence),
        }
    });
    let corrs: Vec<f64> = rows.iter().filter_map(|r| r.corr).collect();
    let mean_corr = mean(corrs.iter().copied());
    let std_corr = mean(corrs.iter().map(|c| (c - mean_corr).powi(2))).sqrt();
    let flat = |g: &ValueGrid| g.0.iter().flatten().map(|&v| f64::from(v)).collect::<Vec<_>>();
    CorrelationProfile {
        mean_independence: mean(rows.iter().filter_map(|r| r.independence)),
        mean_pearson_independence: mean(rows.iter().filter_map(|r| r.pearson_independence)),
        ratio: std_corr / f64::from(a.max()),
        pooled_pearson: pearson(&flat(a), &flat(b)),
        rows,
    }
}
