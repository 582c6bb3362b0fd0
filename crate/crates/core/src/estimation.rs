//! Linear MMSE channel estimation from the training observation and the
//! per-link estimation-error energy scalars.

use crate::channel::{ChannelSet, TrainingObservation};
use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_factor, scale_rows, CMatrix};
use crate::model::{GainTensor, PilotBook, SystemConfig};

/// Channel estimates `Ĥ_jl` (`K x M`) held by base station `l` for the users
/// of cell `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimateSet {
    num_cells: usize,
    h_hat: Vec<CMatrix>,
}

impl ChannelEstimateSet {
    /// Uses the true channels as the estimate (perfect CSI). Test hook.
    pub fn perfect(channels: &ChannelSet) -> Self {
        let n = channels.num_cells();
        let h_hat = (0..n)
            .flat_map(|j| (0..n).map(move |l| (j, l)))
            .map(|(j, l)| channels.get(j, l).clone())
            .collect();
        Self { num_cells: n, h_hat }
    }

    /// Wraps matrices given in `(j, l)` row-major order.
    pub fn from_matrices(num_cells: usize, h_hat: Vec<CMatrix>) -> Result<Self> {
        if h_hat.len() != num_cells * num_cells {
            return Err(Error::ShapeMismatch(format!(
                "expected {} estimate matrices, got {}",
                num_cells * num_cells,
                h_hat.len()
            )));
        }
        Ok(Self { num_cells, h_hat })
    }

    pub fn num_cells(&self) -> usize {
        self.num_cells
    }

    #[inline]
    pub fn get(&self, j: usize, l: usize) -> &CMatrix {
        &self.h_hat[j * self.num_cells + l]
    }

    /// Everything base station `l` knows: `Ĥ_1l, ..., Ĥ_Ll` stacked
    /// vertically into an `LK x M` matrix.
    pub fn stacked(&self, l: usize) -> CMatrix {
        let k = self.h_hat[0].nrows();
        let m = self.h_hat[0].ncols();
        let mut out = CMatrix::zeros(self.num_cells * k, m);
        for j in 0..self.num_cells {
            out.rows_mut(j * k, k).copy_from(self.get(j, l));
        }
        out
    }
}

/// `I_τ + p_r τ Σ_i Ψ_i D_il Ψ_i†`, optionally leaving out cell `skip`.
fn training_covariance(
    pilots: &PilotBook,
    betas: &GainTensor,
    config: &SystemConfig,
    l: usize,
    skip: Option<usize>,
) -> CMatrix {
    let tau = config.pilot_length;
    let mut cov = CMatrix::identity(tau, tau);
    for i in (0..config.num_cells).filter(|&i| Some(i) != skip) {
        let psi = pilots.psi(i);
        let weighted = crate::linalg::scale_cols(psi, betas.diag(i, l));
        cov.gemm(c(config.training_energy()), &weighted, &psi.adjoint(), c(1.0));
    }
    cov
}

/// Precomputed MMSE filters `W_jl = √(p_r τ) D_jl^{1/2} Ψ_j† C_l^{-1}`, where
/// `C_l` is the training covariance at base station `l`.
///
/// The filters only depend on gains and pilots, so a Monte Carlo run builds
/// them once and applies them to every observation.
#[derive(Debug, Clone)]
pub struct MmseEstimator {
    num_cells: usize,
    filters: Vec<CMatrix>,
}

impl MmseEstimator {
    pub fn new(pilots: &PilotBook, betas: &GainTensor, config: &SystemConfig) -> Result<Self> {
        config.validate()?;
        betas.check_shape(config)?;
        pilots.check_shape(config)?;
        let n = config.num_cells;
        let amp = config.training_energy().sqrt();
        let mut filters = vec![CMatrix::zeros(0, 0); n * n];
        for l in 0..n {
            let cov = training_covariance(pilots, betas, config, l, None);
            let chol = hermitian_factor(&cov).ok_or_else(|| {
                Error::PreconditionViolated(format!("training covariance at cell {l} is not positive definite"))
            })?;
            for j in 0..n {
                // (C⁻¹ Ψ_j)† = Ψ_j† C⁻¹ since C is Hermitian.
                let solved = chol.solve(pilots.psi(j));
                let w: Vec<f64> = betas.sqrt_diag(j, l).iter().map(|s| s * amp).collect();
                filters[j * n + l] = scale_rows(&solved.adjoint(), &w);
            }
        }
        Ok(Self { num_cells: n, filters })
    }

    pub fn filter(&self, j: usize, l: usize) -> &CMatrix {
        &self.filters[j * self.num_cells + l]
    }

    pub fn estimate(&self, obs: &TrainingObservation) -> Result<ChannelEstimateSet> {
        let n = self.num_cells;
        if obs.num_cells() != n {
            return Err(Error::ShapeMismatch(format!(
                "observation has {} cells, estimator {n}",
                obs.num_cells()
            )));
        }
        let tau = self.filters[0].ncols();
        let mut h_hat = Vec::with_capacity(n * n);
        for j in 0..n {
            for l in 0..n {
                let y = obs.y(l);
                if y.nrows() != tau {
                    return Err(Error::ShapeMismatch(format!(
                        "observation at cell {l} has {} rows, expected {tau}",
                        y.nrows()
                    )));
                }
                h_hat.push(self.filter(j, l) * y);
            }
        }
        Ok(ChannelEstimateSet { num_cells: n, h_hat })
    }
}

/// MMSE estimates `Ĥ_jl` of every link from the training observation.
pub fn mmse_estimate(
    obs: &TrainingObservation,
    pilots: &PilotBook,
    betas: &GainTensor,
    config: &SystemConfig,
) -> Result<ChannelEstimateSet> {
    MmseEstimator::new(pilots, betas, config)?.estimate(obs)
}

/// Per-antenna error energies `δ_jl`, with `E[F̃_jl† F̃_jl] = δ_jl I_M` for
/// the scaled error `F̃_jl = √p_f D_jl^{1/2} (H_jl - Ĥ_jl)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCovScalars {
    num_cells: usize,
    delta: Vec<f64>,
}

impl ErrorCovScalars {
    #[inline]
    pub fn get(&self, j: usize, l: usize) -> f64 {
        self.delta[j * self.num_cells + l]
    }

    pub fn num_cells(&self) -> usize {
        self.num_cells
    }
}

/// `δ_jl = p_f tr{ D_jl (I_K + p_r τ D_jl^{1/2} Ψ_j† Λ_jl Ψ_j D_jl^{1/2})^{-1} }`
/// with `Λ_jl = (I + p_r τ Σ_{i≠j} Ψ_i D_il Ψ_i†)^{-1}`.
pub fn error_cov_scalars(pilots: &PilotBook, betas: &GainTensor, config: &SystemConfig) -> Result<ErrorCovScalars> {
    config.validate()?;
    betas.check_shape(config)?;
    pilots.check_shape(config)?;
    let n = config.num_cells;
    let k = config.users_per_cell;
    let mut delta = Vec::with_capacity(n * n);
    for j in 0..n {
        for l in 0..n {
            let lambda_inv = training_covariance(pilots, betas, config, l, Some(j));
            let chol = hermitian_factor(&lambda_inv).ok_or_else(|| {
                Error::PreconditionViolated(format!("interference covariance ({j},{l}) is not positive definite"))
            })?;
            let psi = pilots.psi(j);
            let sqrt_d = betas.sqrt_diag(j, l);
            let projected = psi.adjoint() * chol.solve(psi);
            let scaled = crate::linalg::scale_cols(&scale_rows(&projected, &sqrt_d), &sqrt_d);
            let inner = CMatrix::identity(k, k) + scaled * c(config.training_energy());
            let inner_chol = hermitian_factor(&inner).ok_or_else(|| {
                Error::PreconditionViolated(format!("error covariance ({j},{l}) is not positive definite"))
            })?;
            let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                k,
                betas.diag(j, l).iter().map(|b| c(*b)),
            ));
            let trace = inner_chol.solve(&d).trace().re;
            delta.push(config.forward_power * trace);
        }
    }
    Ok(ErrorCovScalars { num_cells: n, delta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_channels, synth_training, TrainingNoise};
    use crate::model::{build_scenario, ScenarioSpec};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_cell(a: f64, m: usize) -> (SystemConfig, GainTensor, PilotBook) {
        let config = SystemConfig::new(2, 1, m, 4).with_powers(100.0, 10.0);
        let (betas, pilots) = build_scenario(&ScenarioSpec::shared_pilot(a, 0.0, 2), &config).unwrap();
        (config, betas, pilots)
    }

    #[test]
    fn shared_pilot_matches_scalar_form() {
        let (config, betas, pilots) = two_cell(0.5, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let h = draw_channels(&config, &mut rng);
        let obs = synth_training(&h, &pilots, &betas, &config, TrainingNoise::Enabled, &mut rng).unwrap();
        let est = mmse_estimate(&obs, &pilots, &betas, &config).unwrap();
        let pt = config.training_energy();
        let psi = pilots.psi(0);
        for l in 0..2 {
            let proj = psi.adjoint() * obs.y(l);
            let total: f64 = (0..2).map(|i| betas.get(i, l, 0)).sum();
            for j in 0..2 {
                let scale = (pt * betas.get(j, l, 0)).sqrt() / (1.0 + pt * total);
                for m in 0..6 {
                    let diff = (est.get(j, l)[(0, m)] - proj[(0, m)] * scale).norm();
                    assert!(diff < 1e-12 * (1.0 + proj[(0, m)].norm()), "diff {diff}");
                }
            }
        }
    }

    #[test]
    fn zero_prior_gives_zero_estimate() {
        let config = SystemConfig::new(2, 1, 3, 2);
        let (_, pilots) = build_scenario(&ScenarioSpec::shared_pilot(0.5, 0.0, 2), &config).unwrap();
        let betas = GainTensor::new(2, 1, vec![0.0; 4]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = draw_channels(&config, &mut rng);
        let obs = synth_training(&h, &pilots, &betas, &config, TrainingNoise::Enabled, &mut rng).unwrap();
        let est = mmse_estimate(&obs, &pilots, &betas, &config).unwrap();
        for j in 0..2 {
            for l in 0..2 {
                assert!(est.get(j, l).iter().all(|z| z.norm() == 0.0));
            }
        }
    }

    #[test]
    fn high_training_power_recovers_channel() {
        let config = SystemConfig::new(1, 2, 4, 2).with_powers(1.0, 1e6);
        let (betas, pilots) = build_scenario(&ScenarioSpec::shared_pilot(0.0, 0.0, 1), &config).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = draw_channels(&config, &mut rng);
        let obs = synth_training(&h, &pilots, &betas, &config, TrainingNoise::Disabled, &mut rng).unwrap();
        let est = mmse_estimate(&obs, &pilots, &betas, &config).unwrap();
        let err = (est.get(0, 0) - h.get(0, 0)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-4, "max entry error {err}");
    }

    #[test]
    fn per_column_equals_whole_matrix() {
        let config = SystemConfig::benchmark();
        let (betas, pilots) = build_scenario(&ScenarioSpec::paired(0.8, 0.08, 4), &config).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let h = draw_channels(&config, &mut rng);
        let obs = synth_training(&h, &pilots, &betas, &config, TrainingNoise::Enabled, &mut rng).unwrap();
        let est = mmse_estimate(&obs, &pilots, &betas, &config).unwrap();
        let estimator = MmseEstimator::new(&pilots, &betas, &config).unwrap();
        for m in 0..config.antennas {
            let col = obs.y(2).column(m).into_owned();
            let e = estimator.filter(1, 2) * col;
            for k in 0..2 {
                assert!((e[k] - est.get(1, 2)[(k, m)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn no_training_power_leaves_prior_energy() {
        let config = SystemConfig::benchmark().with_powers(100.0, 0.0);
        let (betas, pilots) = build_scenario(&ScenarioSpec::paired(0.8, 0.08, 4), &config).unwrap();
        let d = error_cov_scalars(&pilots, &betas, &config).unwrap();
        for j in 0..4 {
            for l in 0..4 {
                let prior: f64 = 100.0 * betas.diag(j, l).iter().sum::<f64>();
                assert!((d.get(j, l) - prior).abs() < 1e-12 * prior.max(1.0));
            }
        }
    }

    #[test]
    fn shared_pilot_delta_scalar_form() {
        let (config, betas, pilots) = two_cell(0.5, 4);
        let d = error_cov_scalars(&pilots, &betas, &config).unwrap();
        let pt = config.training_energy();
        for j in 0..2 {
            for l in 0..2 {
                let total: f64 = (0..2).map(|i| betas.get(i, l, 0)).sum();
                let others = total - betas.get(j, l, 0);
                let expected = 100.0 * betas.get(j, l, 0) * (1.0 + pt * others) / (1.0 + pt * total);
                assert!((d.get(j, l) - expected).abs() < 1e-12, "({j},{l}) {} vs {expected}", d.get(j, l));
            }
        }
    }

    #[test]
    fn delta_bounds_and_symmetry() {
        let config = SystemConfig::benchmark();
        let (betas, pilots) = build_scenario(&ScenarioSpec::paired(0.8, 0.08, 4), &config).unwrap();
        let d = error_cov_scalars(&pilots, &betas, &config).unwrap();
        for j in 0..4 {
            for l in 0..4 {
                let prior: f64 = config.forward_power * betas.diag(j, l).iter().sum::<f64>();
                assert!(d.get(j, l) >= 0.0 && d.get(j, l) <= prior + 1e-12);
                assert!((d.get(j, l) - d.get(l, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn variance_split_and_orthogonality() {
        // K = 1 shared pilot: var(ĥ) + var(h̃) = 1 per entry, and the
        // estimate is uncorrelated with its error.
        let (config, betas, pilots) = two_cell(0.5, 1);
        let estimator = MmseEstimator::new(&pilots, &betas, &config).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let n = 100_000;
        let (mut var_hat, mut var_err) = (0.0, 0.0);
        let mut cross = Complex64::new(0.0, 0.0);
        for _ in 0..n {
            let h = draw_channels(&config, &mut rng);
            let obs = synth_training(&h, &pilots, &betas, &config, TrainingNoise::Enabled, &mut rng).unwrap();
            let est = estimator.estimate(&obs).unwrap();
            let hat = est.get(1, 0)[(0, 0)];
            let err = h.get(1, 0)[(0, 0)] - hat;
            var_hat += hat.norm_sqr();
            var_err += err.norm_sqr();
            cross += hat * err.conj();
        }
        let nf = n as f64;
        let pt = config.training_energy();
        let expected_hat = pt * 0.5 / (1.0 + pt * 1.5);
        let expected_err = (1.0 + pt * 1.0) / (1.0 + pt * 1.5);
        assert!(((var_hat / nf) / expected_hat - 1.0).abs() < 0.02);
        assert!(((var_err / nf) / expected_err - 1.0).abs() < 0.02);
        assert!(((var_hat + var_err) / nf - 1.0).abs() < 0.02);
        assert!((cross / nf).norm() < 0.02);
    }

    #[test]
    fn stacked_layout() {
        let config = SystemConfig::benchmark();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = draw_channels(&config, &mut rng);
        let est = ChannelEstimateSet::perfect(&h);
        let s = est.stacked(3);
        assert_eq!(s.shape(), (8, 8));
        assert_eq!(s.rows(4, 2).into_owned(), *h.get(2, 3));
    }
}
