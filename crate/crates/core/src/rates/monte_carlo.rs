//! Monte Carlo estimation of the effective-gain moments.
//!
//! Only channels and training noise are simulated; the expectations over data
//! symbols and downlink noise are taken analytically, so each trial
//! contributes one sample of every effective gain. Trials are split into
//! fixed-size chunks that run in parallel and are merged in chunk order,
//! which makes the result a deterministic function of the seed.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{achievable_rate, InterferenceTerm, RateReport, UserMoments};
use crate::channel::{draw_channels, synth_training, ChannelSet, TrainingNoise};
use crate::error::{Error, Result};
use crate::estimation::{error_cov_scalars, ChannelEstimateSet, ErrorCovScalars, MmseEstimator};
use crate::linalg::{scale_rows, CMatrix};
use crate::model::{GainTensor, PilotBook, SystemConfig};
use crate::precoding::{Precoder, PrecoderKind};
use crate::rng::{Stream, TrialStreams};
use crate::stats::Moments;

pub const DEFAULT_CHUNK_SIZE: u64 = 1024;

/// Channel knowledge used by the precoders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CsiMode {
    /// MMSE estimates from uplink training.
    #[default]
    Estimated,
    /// True channels (test hook).
    Perfect,
}

/// `G_jl = √p_f D_jl^{1/2} H_jl A_l`; entry `(k, i)` is `g^{jk}_{li}`.
pub fn effective_gains(
    channels: &ChannelSet,
    precoder: &Precoder,
    betas: &GainTensor,
    config: &SystemConfig,
    j: usize,
    l: usize,
) -> CMatrix {
    let pf = config.forward_power.sqrt();
    let w: Vec<f64> = betas.sqrt_diag(j, l).iter().map(|s| s * pf).collect();
    scale_rows(channels.get(j, l), &w) * &precoder.a
}

/// Accumulated statistics of one chunk of trials.
#[derive(Debug, Clone)]
struct Tally {
    /// Per `(j, k)`: (Re g, Im g, |g|², Σ interference).
    user: Vec<Moments<4>>,
    /// Per `(j, k, l, i)`: |g^{jk}_{li}|².
    power: Vec<Moments<1>>,
}

impl Tally {
    fn new(users: usize) -> Self {
        Self {
            user: vec![Moments::default(); users],
            power: vec![Moments::default(); users * users],
        }
    }

    fn merge(&mut self, other: &Tally) {
        self.user.iter_mut().zip(&other.user).for_each(|(a, b)| a.merge(b));
        self.power.iter_mut().zip(&other.power).for_each(|(a, b)| a.merge(b));
    }
}

/// Builder for a Monte Carlo rate evaluation.
#[derive(Debug, Clone)]
pub struct MonteCarlo<'a> {
    config: &'a SystemConfig,
    betas: &'a GainTensor,
    pilots: &'a PilotBook,
    trials: u64,
    chunk_size: u64,
    csi: CsiMode,
}

impl<'a> MonteCarlo<'a> {
    pub fn new(config: &'a SystemConfig, betas: &'a GainTensor, pilots: &'a PilotBook) -> Self {
        Self {
            config,
            betas,
            pilots,
            trials: 100_000,
            chunk_size: DEFAULT_CHUNK_SIZE,
            csi: CsiMode::Estimated,
        }
    }

    pub fn trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    /// Trials per parallel work unit. Part of the reproducibility contract:
    /// changing it changes the floating-point merge order.
    pub fn chunk_size(mut self, chunk_size: u64) -> Self {
        self.chunk_size = chunk_size;
        self
    }

    pub fn csi(mut self, csi: CsiMode) -> Self {
        self.csi = csi;
        self
    }

    pub fn run(&self, method: PrecoderKind) -> Result<RateReport> {
        let config = self.config;
        config.validate()?;
        self.betas.check_shape(config)?;
        self.pilots.check_shape(config)?;
        if self.trials < 2 {
            return Err(Error::InvalidConfig("Monte Carlo needs at least two trials".into()));
        }
        if self.chunk_size == 0 {
            return Err(Error::InvalidConfig("chunk size must be positive".into()));
        }
        let estimator = MmseEstimator::new(self.pilots, self.betas, config)?;
        let deltas = error_cov_scalars(self.pilots, self.betas, config)?;
        let streams = TrialStreams::new(config.rng_seed);
        let users = config.num_cells * config.users_per_cell;

        let chunks = self.trials.div_ceil(self.chunk_size);
        let tallies: Vec<Result<Tally>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let start = c * self.chunk_size;
                let end = (start + self.chunk_size).min(self.trials);
                let mut tally = Tally::new(users);
                for trial in start..end {
                    self.run_trial(trial, method, &estimator, &deltas, &streams, &mut tally)?;
                }
                Ok(tally)
            })
            .collect();

        let mut total = Tally::new(users);
        for t in tallies {
            total.merge(&t?);
        }
        Ok(self.report(method, &total))
    }

    fn run_trial(
        &self,
        trial: u64,
        method: PrecoderKind,
        estimator: &MmseEstimator,
        deltas: &ErrorCovScalars,
        streams: &TrialStreams,
        tally: &mut Tally,
    ) -> Result<()> {
        let config = self.config;
        let (n, k) = (config.num_cells, config.users_per_cell);
        let channels = draw_channels(config, &mut streams.rng(trial, Stream::Channels));
        let est = match self.csi {
            CsiMode::Estimated => {
                let mut noise = streams.rng(trial, Stream::TrainingNoise);
                let obs = synth_training(&channels, self.pilots, self.betas, config, TrainingNoise::Enabled, &mut noise)?;
                estimator.estimate(&obs)?
            }
            CsiMode::Perfect => ChannelEstimateSet::perfect(&channels),
        };
        let precoders = (0..n)
            .map(|l| method.build(&est, deltas, self.betas, config, l))
            .collect::<Result<Vec<_>>>()?;

        let users = n * k;
        for j in 0..n {
            let gains: Vec<CMatrix> = precoders
                .iter()
                .enumerate()
                .map(|(l, p)| effective_gains(&channels, p, self.betas, config, j, l))
                .collect();
            for uk in 0..k {
                let own_idx = j * k + uk;
                let row = own_idx * users;
                let mut interference = 0.0;
                for (l, g) in gains.iter().enumerate() {
                    for ui in 0..k {
                        let p = g[(uk, ui)].norm_sqr();
                        tally.power[row + l * k + ui].push([p]);
                        if l * k + ui != own_idx {
                            interference += p;
                        }
                    }
                }
                let own = gains[j][(uk, uk)];
                tally.user[own_idx].push([own.re, own.im, own.norm_sqr(), interference]);
            }
        }
        Ok(())
    }

    fn report(&self, method: PrecoderKind, tally: &Tally) -> RateReport {
        let (n, k) = (self.config.num_cells, self.config.users_per_cell);
        let users_total = n * k;
        let mut users = Vec::with_capacity(users_total);
        for j in 0..n {
            for uk in 0..k {
                let idx = j * k + uk;
                let m = &tally.user[idx];
                let [mr, mi, s2, _] = m.mean();
                let cov = m.covariance();
                let signal_mean = Complex64::new(mr, mi);
                let signal_var = cov[0][0] + cov[1][1];
                let interference: Vec<InterferenceTerm> = (0..users_total)
                    .filter(|&other| other != idx)
                    .map(|other| {
                        let p = &tally.power[idx * users_total + other];
                        InterferenceTerm {
                            cell: other / k,
                            user: other % k,
                            power: p.mean()[0],
                            stderr: p.stderr_of([1.0]),
                        }
                    })
                    .collect();
                let total: f64 = interference.iter().map(|t| t.power).sum();
                let rate = achievable_rate(signal_mean, signal_var, total);

                // Delta method on R(μ_re, μ_im, E|g|², I) = log2(1 + E|g|² + I) - log2(1 + E|g|² - |μ|² + I).
                let ln2 = std::f64::consts::LN_2;
                let denom = 1.0 + signal_var + total;
                let numer = 1.0 + s2 + total;
                let d_second = (1.0 / numer - 1.0 / denom) / ln2;
                let grad = [2.0 * mr / (denom * ln2), 2.0 * mi / (denom * ln2), d_second, d_second];

                users.push(UserMoments {
                    cell: j,
                    user: uk,
                    signal_mean,
                    signal_var,
                    interference,
                    signal_mean_stderr: m.stderr_of([1.0, 0.0, 0.0, 0.0]).hypot(m.stderr_of([0.0, 1.0, 0.0, 0.0])),
                    signal_var_stderr: m.stderr_of([-2.0 * mr, -2.0 * mi, 1.0, 0.0]),
                    rate,
                    rate_stderr: m.stderr_of(grad),
                });
            }
        }
        RateReport {
            method,
            trials: self.trials,
            users,
        }
    }
}

/// Monte Carlo rate report with estimated CSI and default chunking.
pub fn monte_carlo_rates(
    config: &SystemConfig,
    betas: &GainTensor,
    pilots: &PilotBook,
    method: PrecoderKind,
    n_trials: u64,
) -> Result<RateReport> {
    MonteCarlo::new(config, betas, pilots).trials(n_trials).run(method)
}
