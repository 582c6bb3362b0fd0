//! CSV results file.
//!
//! Columns, in order:
//!
//! | column        | meaning                                                  |
//! |---------------|----------------------------------------------------------|
//! | `experiment`  | experiment name                                          |
//! | `method`      | `ZF`, `GPS`, `MCMMSE`, `closed_form` or `asymptotic`     |
//! | `a`, `b`      | cross gains of the scenario                              |
//! | `M`, `K`, `L`, `tau` | antennas, users per cell, cells, pilot length     |
//! | `p_f_db`, `p_r_db`   | forward and reverse power in dB                   |
//! | `gamma`       | out-of-cell weight of the multi-cell MMSE precoder       |
//! | `seed`, `trials` | master seed and Monte Carlo trial count (0 if exact)  |
//! | `cell`, `user`| user index; empty on error rows                          |
//! | `rate`        | achievable rate in bit/s/Hz                              |
//! | `stderr`      | Monte Carlo standard error of `rate`; empty if exact     |
//! | `min_rate`    | minimum rate over all users at this sweep point          |
//! | `closed_form` | closed-form reference rate for this user, if available   |
//! | `error`       | error message; empty on success                          |
//!
//! Floats are written with 9 significant digits.

use std::fs::File;
use std::path::Path;

use crate::error::{CliError, Result};

pub const CSV_HEADER: [&str; 20] = [
    "experiment",
    "method",
    "a",
    "b",
    "M",
    "K",
    "L",
    "tau",
    "p_f_db",
    "p_r_db",
    "gamma",
    "seed",
    "trials",
    "cell",
    "user",
    "rate",
    "stderr",
    "min_rate",
    "closed_form",
    "error",
];

/// One CSV line: a single user at one sweep point under one method, or an
/// error record for a sweep point that could not be evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub method: String,
    pub a: f64,
    pub b: f64,
    pub antennas: usize,
    pub users_per_cell: usize,
    pub num_cells: usize,
    pub pilot_length: usize,
    pub forward_power_db: f64,
    pub reverse_power_db: f64,
    pub gamma: f64,
    pub seed: u64,
    pub trials: u64,
    pub cell: Option<usize>,
    pub user: Option<usize>,
    pub rate: Option<f64>,
    pub stderr: Option<f64>,
    pub min_rate: Option<f64>,
    pub closed_form: Option<f64>,
    pub error: Option<String>,
}

fn float(x: f64) -> String {
    format!("{x:.8e}")
}

fn opt<T>(x: Option<T>, f: impl Fn(T) -> String) -> String {
    x.map(f).unwrap_or_default()
}

impl ResultRow {
    fn record(&self) -> Vec<String> {
        vec![
            self.experiment.clone(),
            self.method.clone(),
            float(self.a),
            float(self.b),
            self.antennas.to_string(),
            self.users_per_cell.to_string(),
            self.num_cells.to_string(),
            self.pilot_length.to_string(),
            float(self.forward_power_db),
            float(self.reverse_power_db),
            float(self.gamma),
            self.seed.to_string(),
            self.trials.to_string(),
            opt(self.cell, |v| v.to_string()),
            opt(self.user, |v| v.to_string()),
            opt(self.rate, float),
            opt(self.stderr, float),
            opt(self.min_rate, float),
            opt(self.closed_form, float),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

/// Writes `rows` to `path`, replacing any existing file.
pub fn write_results(rows: &[ResultRow], path: &Path) -> Result<()> {
    let csv_err = |source| CliError::Csv { path: path.to_path_buf(), source };
    let file = File::create(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let mut writer = csv::Writer::from_writer(file);
    writer.write_record(CSV_HEADER).map_err(csv_err)?;
    for row in rows {
        writer.write_record(row.record()).map_err(csv_err)?;
    }
    writer
        .flush()
        .map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Parses a file produced by [`write_results`].
pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let csv_err = |source| CliError::Csv { path: path.to_path_buf(), source };
    let malformed = |message: String| CliError::Malformed { path: path.to_path_buf(), message };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(malformed(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let line = idx + 2;
        let field = |i: usize| record.get(i).unwrap_or("");
        fn req<T: std::str::FromStr>(s: &str, name: &str, line: usize) -> std::result::Result<T, String> {
            s.parse().map_err(|_| format!("line {line}: bad {name} {s:?}"))
        }
        fn optional<T: std::str::FromStr>(s: &str, name: &str, line: usize) -> std::result::Result<Option<T>, String> {
            if s.is_empty() {
                Ok(None)
            } else {
                req(s, name, line).map(Some)
            }
        }
        let parsed = (|| -> std::result::Result<ResultRow, String> {
            Ok(ResultRow {
                experiment: field(0).to_string(),
                method: field(1).to_string(),
                a: req(field(2), "a", line)?,
                b: req(field(3), "b", line)?,
                antennas: req(field(4), "M", line)?,
                users_per_cell: req(field(5), "K", line)?,
                num_cells: req(field(6), "L", line)?,
                pilot_length: req(field(7), "tau", line)?,
                forward_power_db: req(field(8), "p_f_db", line)?,
                reverse_power_db: req(field(9), "p_r_db", line)?,
                gamma: req(field(10), "gamma", line)?,
                seed: req(field(11), "seed", line)?,
                trials: req(field(12), "trials", line)?,
                cell: optional(field(13), "cell", line)?,
                user: optional(field(14), "user", line)?,
                rate: optional(field(15), "rate", line)?,
                stderr: optional(field(16), "stderr", line)?,
                min_rate: optional(field(17), "min_rate", line)?,
                closed_form: optional(field(18), "closed_form", line)?,
                error: Some(field(19).to_string()).filter(|s| !s.is_empty()),
            })
        })();
        rows.push(parsed.map_err(malformed)?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(float(1.0), "1.00000000e0");
        assert_eq!(float(2.0 / 3.0), "6.66666667e-1");
        assert_eq!(float(-1234.5678901), "-1.23456789e3");
        let back: f64 = float(std::f64::consts::PI).parse().unwrap();
        assert!((back - std::f64::consts::PI).abs() / std::f64::consts::PI < 5e-9);
    }
}
