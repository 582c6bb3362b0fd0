//! Named experiments and the sweep runner.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use pilotcon::rates::{asymptotic_rate, closed_form_rate, AsymptoticRate, MonteCarlo};
use pilotcon::{build_scenario, ConfigFile, PrecoderKind, ScenarioSpec, SystemConfig};
use rayon::prelude::*;

use crate::error::{CliError, Result};
use crate::output::ResultRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentName {
    /// Two-cell, one-user, shared-pilot ZF rates against the closed form.
    Theorem1Verify,
    /// Min rate over a grid of cross gains `(a, b)`.
    Fig3Sweep,
    /// GPS vs multi-cell MMSE min rate over antenna counts.
    Fig4Msweep,
    /// Closed-form rate approaching its large-`M` limit.
    AsymptoteDemo,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 4] = [
        ExperimentName::Theorem1Verify,
        ExperimentName::Fig3Sweep,
        ExperimentName::Fig4Msweep,
        ExperimentName::AsymptoteDemo,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::Theorem1Verify => "theorem1_verify",
            ExperimentName::Fig3Sweep => "fig3_sweep",
            ExperimentName::Fig4Msweep => "fig4_msweep",
            ExperimentName::AsymptoteDemo => "asymptote_demo",
        }
    }

    fn methods(self) -> &'static [Method] {
        use Method::*;
        match self {
            ExperimentName::Theorem1Verify => &[Simulated(PrecoderKind::ZeroForcing)],
            ExperimentName::Fig3Sweep => &[
                Simulated(PrecoderKind::ZeroForcing),
                Simulated(PrecoderKind::Gps),
                Simulated(PrecoderKind::MultiCellMmse),
            ],
            ExperimentName::Fig4Msweep => &[Simulated(PrecoderKind::Gps), Simulated(PrecoderKind::MultiCellMmse)],
            ExperimentName::AsymptoteDemo => &[ClosedForm, Asymptotic],
        }
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentName {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| CliError::InvalidSpec(format!("unknown experiment {s:?}")))
    }
}

/// How pilots are reused across cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReuseLayout {
    /// Cells `2i` and `2i+1` form a pair; pairs alternate two pilot pools.
    Paired,
    /// Every cell uses the same pilot pool.
    SharedPilot,
}

impl ReuseLayout {
    fn scenario(self, a: f64, b: f64, num_cells: usize) -> ScenarioSpec {
        match self {
            ReuseLayout::Paired => ScenarioSpec::paired(a, b, num_cells),
            ReuseLayout::SharedPilot => ScenarioSpec::shared_pilot(a, b, num_cells),
        }
    }
}

/// Values of the `b` axis.
#[derive(Debug, Clone, PartialEq)]
pub enum BAxis {
    Values(Vec<f64>),
    /// `b = ratio * a` for every `a` on the sweep.
    RatioOfA(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Method {
    Simulated(PrecoderKind),
    ClosedForm,
    Asymptotic,
}

impl Method {
    fn tag(self) -> &'static str {
        match self {
            Method::Simulated(kind) => kind.tag(),
            Method::ClosedForm => "closed_form",
            Method::Asymptotic => "asymptotic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: ExperimentName,
    pub layout: ReuseLayout,
    /// System parameters, powers in dB and trial count. `antennas` is
    /// replaced by each value of `m_values`.
    pub base: ConfigFile,
    pub a_values: Vec<f64>,
    pub b_axis: BAxis,
    pub m_values: Vec<usize>,
    pub output: PathBuf,
}

fn two_cell_base() -> ConfigFile {
    ConfigFile {
        config: SystemConfig::new(2, 1, 8, 4).with_powers(100.0, 10.0),
        forward_power_db: 20.0,
        reverse_power_db: 10.0,
        cross_gain_a: 0.5,
        cross_gain_b: 0.0,
        ..ConfigFile::default()
    }
}

impl ExperimentSpec {
    /// Preset sweep for `name`. Grids not fixed by the experiment itself are
    /// representative choices:
    ///
    /// * `theorem1_verify`: `L = 2, K = 1, τ = 4`, 20 dB / 10 dB, `a = 0.5`,
    ///   `M ∈ {1, 4, 8, 32}`.
    /// * `fig3_sweep`: benchmark cells, `M = 8`, `a ∈ {0.1, …, 1.0}`,
    ///   `b ∈ {0.01, 0.05, 0.1}`.
    /// * `fig4_msweep`: benchmark cells, `a = 0.8`, `b = 0.1a`,
    ///   `M ∈ {2, 4, 8, 16}`.
    /// * `asymptote_demo`: the two-cell instance at `M = 2^0 … 2^16` and
    ///   `M = 100000`.
    pub fn preset(name: ExperimentName) -> Self {
        let output = PathBuf::from(format!("{name}.csv"));
        match name {
            ExperimentName::Theorem1Verify => Self {
                name,
                layout: ReuseLayout::SharedPilot,
                base: two_cell_base(),
                a_values: vec![0.5],
                b_axis: BAxis::Values(vec![0.0]),
                m_values: vec![1, 4, 8, 32],
                output,
            },
            ExperimentName::Fig3Sweep => Self {
                name,
                layout: ReuseLayout::Paired,
                base: ConfigFile::default(),
                a_values: (1..=10).map(|i| i as f64 / 10.0).collect(),
                b_axis: BAxis::Values(vec![0.01, 0.05, 0.1]),
                m_values: vec![8],
                output,
            },
            ExperimentName::Fig4Msweep => Self {
                name,
                layout: ReuseLayout::Paired,
                base: ConfigFile::default(),
                a_values: vec![0.8],
                b_axis: BAxis::RatioOfA(0.1),
                m_values: vec![2, 4, 8, 16],
                output,
            },
            ExperimentName::AsymptoteDemo => Self {
                name,
                layout: ReuseLayout::SharedPilot,
                base: two_cell_base(),
                a_values: vec![0.5],
                b_axis: BAxis::Values(vec![0.0]),
                m_values: (0..=16).map(|e| 1usize << e).chain([100_000]).collect(),
                output,
            },
        }
    }

    /// Replaces the system parameters with those of a config file. Axes the
    /// preset sweeps keep their grid; single-valued axes take the file's
    /// `a`, `b` or `M`.
    pub fn with_base(mut self, file: ConfigFile) -> Self {
        if self.name != ExperimentName::Fig3Sweep {
            self.a_values = vec![file.cross_gain_a];
        }
        if matches!(self.name, ExperimentName::Theorem1Verify | ExperimentName::AsymptoteDemo) {
            self.b_axis = BAxis::Values(vec![file.cross_gain_b]);
        }
        if self.name == ExperimentName::Fig3Sweep {
            self.m_values = vec![file.config.antennas];
        }
        self.base = file;
        self
    }

    pub fn trials(&self) -> u64 {
        self.base.trials as u64
    }

    fn uses_monte_carlo(&self) -> bool {
        self.name.methods().iter().any(|m| matches!(m, Method::Simulated(_)))
    }

    /// Checks the spec before any computation.
    pub fn validate(&self) -> Result<()> {
        let invalid = |m: &str| Err(CliError::InvalidSpec(m.to_string()));
        if self.a_values.is_empty() {
            return invalid("a axis is empty");
        }
        if matches!(&self.b_axis, BAxis::Values(v) if v.is_empty()) {
            return invalid("b axis is empty");
        }
        if self.m_values.is_empty() {
            return invalid("M axis is empty");
        }
        if self.m_values.contains(&0) {
            return invalid("M values must be positive");
        }
        let finite = self.a_values.iter().all(|x| x.is_finite())
            && match &self.b_axis {
                BAxis::Values(v) => v.iter().all(|x| x.is_finite()),
                BAxis::RatioOfA(r) => r.is_finite(),
            };
        if !finite {
            return invalid("axis values must be finite");
        }
        if self.uses_monte_carlo() && self.trials() < 2 {
            return invalid("at least 2 trials are required");
        }
        check_writable(&self.output)
    }

    /// `(a, b, M)` sweep points in output order.
    pub fn points(&self) -> Vec<(f64, f64, usize)> {
        let mut out = Vec::new();
        for &a in &self.a_values {
            let bs = match &self.b_axis {
                BAxis::Values(v) => v.clone(),
                BAxis::RatioOfA(r) => vec![r * a],
            };
            for b in bs {
                for &m in &self.m_values {
                    out.push((a, b, m));
                }
            }
        }
        out
    }
}

fn check_writable(path: &Path) -> Result<()> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if !parent.is_dir() {
        return Err(CliError::InvalidSpec(format!(
            "output directory {} does not exist",
            parent.display()
        )));
    }
    if path.is_dir() {
        return Err(CliError::InvalidSpec(format!("output path {} is a directory", path.display())));
    }
    Ok(())
}

/// Runs every sweep point under every method of the experiment. Points are
/// evaluated in parallel; rows come back in sweep order. Failures at a
/// point produce an error row instead of aborting the sweep.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let tasks: Vec<((f64, f64, usize), Method)> = spec
        .points()
        .into_iter()
        .flat_map(|p| spec.name.methods().iter().map(move |&m| (p, m)))
        .collect();
    let rows: Vec<Vec<ResultRow>> = tasks
        .par_iter()
        .map(|&((a, b, m), method)| evaluate(spec, a, b, m, method))
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

fn evaluate(spec: &ExperimentSpec, a: f64, b: f64, m: usize, method: Method) -> Vec<ResultRow> {
    let mut config = spec.base.config.clone();
    config.antennas = m;
    let trials = match method {
        Method::Simulated(_) => spec.trials(),
        _ => 0,
    };
    let template = ResultRow {
        experiment: spec.name.to_string(),
        method: method.tag().to_string(),
        a,
        b,
        antennas: m,
        users_per_cell: config.users_per_cell,
        num_cells: config.num_cells,
        pilot_length: config.pilot_length,
        forward_power_db: spec.base.forward_power_db,
        reverse_power_db: spec.base.reverse_power_db,
        gamma: config.gamma,
        seed: config.rng_seed,
        trials,
        cell: None,
        user: None,
        rate: None,
        stderr: None,
        min_rate: None,
        closed_form: None,
        error: None,
    };
    match user_rates(spec, &config, a, b, method, trials) {
        Ok(users) => {
            let min_rate = users.iter().map(|u| u.rate).fold(f64::INFINITY, f64::min);
            users
                .into_iter()
                .map(|u| ResultRow {
                    cell: Some(u.cell),
                    user: Some(u.user),
                    rate: Some(u.rate),
                    stderr: u.stderr,
                    min_rate: Some(min_rate),
                    closed_form: u.closed_form,
                    ..template.clone()
                })
                .collect()
        }
        Err(e) => vec![ResultRow {
            error: Some(e.to_string()),
            ..template
        }],
    }
}

struct UserRate {
    cell: usize,
    user: usize,
    rate: f64,
    stderr: Option<f64>,
    closed_form: Option<f64>,
}

fn user_rates(
    spec: &ExperimentSpec,
    config: &SystemConfig,
    a: f64,
    b: f64,
    method: Method,
    trials: u64,
) -> pilotcon::Result<Vec<UserRate>> {
    config.validate()?;
    let scenario = spec.layout.scenario(a, b, config.num_cells);
    let (betas, pilots) = build_scenario(&scenario, config)?;
    let cells = 0..config.num_cells;
    match method {
        Method::Simulated(kind) => {
            let report = MonteCarlo::new(config, &betas, &pilots).trials(trials).run(kind)?;
            let reference = spec.name == ExperimentName::Theorem1Verify;
            report
                .users
                .iter()
                .map(|u| {
                    let closed_form = if reference {
                        Some(closed_form_rate(&betas, config, u.cell)?)
                    } else {
                        None
                    };
                    Ok(UserRate {
                        cell: u.cell,
                        user: u.user,
                        rate: u.rate,
                        stderr: Some(u.rate_stderr),
                        closed_form,
                    })
                })
                .collect()
        }
        Method::ClosedForm => cells
            .map(|j| {
                let rate = closed_form_rate(&betas, config, j)?;
                Ok(UserRate { cell: j, user: 0, rate, stderr: None, closed_form: Some(rate) })
            })
            .collect(),
        Method::Asymptotic => cells
            .map(|j| {
                let rate = match asymptotic_rate(&betas, config, j)? {
                    AsymptoticRate::Finite(r) => r,
                    AsymptoticRate::Unbounded => f64::INFINITY,
                };
                Ok(UserRate { cell: j, user: 0, rate, stderr: None, closed_form: None })
            })
            .collect(),
    }
}
