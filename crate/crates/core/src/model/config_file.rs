//! Plain-text `key = value` scenario configuration.
//!
//! Recognised keys: `L`, `K`, `M`, `tau`, `p_f_db`, `p_r_db`, `gamma`, `a`,
//! `b`, `seed`, `trials`. Blank lines and lines starting with `#` are
//! ignored; trailing `# ...` comments are stripped. Missing keys keep the
//! four-cell benchmark defaults (`a = 0.8`, `b = 0.08`, `trials = 100000`).

use std::str::FromStr;

use super::{db_to_linear, SystemConfig};
use crate::error::{Error, Result};

pub const DEFAULT_TRIALS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigFile {
    pub config: SystemConfig,
    pub forward_power_db: f64,
    pub reverse_power_db: f64,
    pub cross_gain_a: f64,
    pub cross_gain_b: f64,
    pub trials: usize,
}

impl Default for ConfigFile {
    fn default() -> Self {
        Self {
            config: SystemConfig::benchmark(),
            forward_power_db: 20.0,
            reverse_power_db: 10.0,
            cross_gain_a: 0.8,
            cross_gain_b: 0.08,
            trials: DEFAULT_TRIALS,
        }
    }
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Parse {
        line,
        message: format!("cannot parse value {value:?} for key {key}"),
    })
}

impl FromStr for ConfigFile {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut out = ConfigFile::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(Error::Parse {
                    line,
                    message: format!("expected `key = value`, got {content:?}"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            let c = &mut out.config;
            match key {
                "L" => c.num_cells = parse_value(line, key, value)?,
                "K" => c.users_per_cell = parse_value(line, key, value)?,
                "M" => c.antennas = parse_value(line, key, value)?,
                "tau" => c.pilot_length = parse_value(line, key, value)?,
                "p_f_db" => out.forward_power_db = parse_value(line, key, value)?,
                "p_r_db" => out.reverse_power_db = parse_value(line, key, value)?,
                "gamma" => c.gamma = parse_value(line, key, value)?,
                "a" => out.cross_gain_a = parse_value(line, key, value)?,
                "b" => out.cross_gain_b = parse_value(line, key, value)?,
                "seed" => c.rng_seed = parse_value(line, key, value)?,
                "trials" => out.trials = parse_value(line, key, value)?,
                other => {
                    return Err(Error::Parse {
                        line,
                        message: format!("unknown key {other:?}"),
                    })
                }
            }
        }
        out.config.forward_power = db_to_linear(out.forward_power_db);
        out.config.reverse_power = db_to_linear(out.reverse_power_db);
        out.config.validate()?;
        Ok(out)
    }
}
