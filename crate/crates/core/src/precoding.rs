//! Linear downlink precoders: zero-forcing, multi-cell MMSE and its
//! single-cell (`γ = 0`) specialization GPS.
//!
//! Every precoder is normalized to `tr{A_l† A_l} = 1`. Each cell's precoder
//! depends only on that base station's own estimates, so cells can be
//! processed independently.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimation::{ChannelEstimateSet, ErrorCovScalars};
use crate::linalg::{c, frobenius_sq, hermitian_factor, hermitian_rcond, scale_rows, CMatrix};
use crate::model::{GainTensor, SystemConfig};

/// Gram matrices whose reciprocal condition number falls below this are
/// treated as singular by zero-forcing.
pub const ZF_RCOND_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrecoderKind {
    ZeroForcing,
    MultiCellMmse,
    Gps,
}

impl PrecoderKind {
    pub const ALL: [PrecoderKind; 3] = [PrecoderKind::ZeroForcing, PrecoderKind::Gps, PrecoderKind::MultiCellMmse];

    pub fn tag(self) -> &'static str {
        match self {
            PrecoderKind::ZeroForcing => "ZF",
            PrecoderKind::MultiCellMmse => "MCMMSE",
            PrecoderKind::Gps => "GPS",
        }
    }

    /// Builds this kind of precoder for cell `l`. The multi-cell MMSE variant
    /// uses `config.gamma`.
    pub fn build(
        self,
        est: &ChannelEstimateSet,
        deltas: &ErrorCovScalars,
        betas: &GainTensor,
        config: &SystemConfig,
        l: usize,
    ) -> Result<Precoder> {
        match self {
            PrecoderKind::ZeroForcing => zf_precoder(est, betas, config, l),
            PrecoderKind::MultiCellMmse => mcmmse_precoder(est, deltas, betas, config, l),
            PrecoderKind::Gps => gps_precoder(est, deltas, betas, config, l),
        }
    }
}

impl fmt::Display for PrecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for PrecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "ZF" => Ok(PrecoderKind::ZeroForcing),
            "MCMMSE" => Ok(PrecoderKind::MultiCellMmse),
            "GPS" => Ok(PrecoderKind::Gps),
            other => Err(Error::InvalidConfig(format!("unknown precoder {other:?}"))),
        }
    }
}

/// Regularization data of an MMSE-type precoder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecoderParams {
    pub gamma: f64,
    /// `δ_ll + γ² Σ_{j≠l} δ_jl + K`.
    pub eta: f64,
    /// Scaling that brings the unnormalized solution to unit trace.
    pub alpha: f64,
}

/// An `M x K` precoding matrix `A_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    pub a: CMatrix,
    pub kind: PrecoderKind,
    pub params: Option<PrecoderParams>,
}

impl Precoder {
    /// `tr{A† A}`.
    pub fn power(&self) -> f64 {
        frobenius_sq(&self.a)
    }
}

/// `F̂_jl = √p_f D_jl^{1/2} Ĥ_jl`.
pub fn scaled_estimate(
    est: &ChannelEstimateSet,
    betas: &GainTensor,
    config: &SystemConfig,
    j: usize,
    l: usize,
) -> CMatrix {
    let pf = config.forward_power.sqrt();
    let w: Vec<f64> = betas.sqrt_diag(j, l).iter().map(|s| s * pf).collect();
    scale_rows(est.get(j, l), &w)
}

fn check_inputs(est: &ChannelEstimateSet, betas: &GainTensor, config: &SystemConfig, l: usize) -> Result<()> {
    betas.check_shape(config)?;
    if est.num_cells() != config.num_cells {
        return Err(Error::ShapeMismatch(format!(
            "estimate set has {} cells, config {}",
            est.num_cells(),
            config.num_cells
        )));
    }
    if l >= config.num_cells {
        return Err(Error::ShapeMismatch(format!("cell index {l} out of range")));
    }
    let shape = est.get(l, l).shape();
    if shape != (config.users_per_cell, config.antennas) {
        return Err(Error::ShapeMismatch(format!(
            "estimates are {shape:?}, expected ({}, {})",
            config.users_per_cell, config.antennas
        )));
    }
    Ok(())
}

/// Zero-forcing on the in-cell estimate:
/// `A_l ∝ Ĝ_ll† (Ĝ_ll Ĝ_ll†)^{-1}` with `Ĝ_ll = F̂_ll`.
pub fn zf_precoder(est: &ChannelEstimateSet, betas: &GainTensor, config: &SystemConfig, l: usize) -> Result<Precoder> {
    check_inputs(est, betas, config, l)?;
    let g = scaled_estimate(est, betas, config, l, l);
    let a = zero_forcing_matrix(&g).map_err(|rcond| Error::RankDeficient { cell: l, rcond })?;
    Ok(Precoder {
        a,
        kind: PrecoderKind::ZeroForcing,
        params: None,
    })
}

/// Unit-trace right pseudo-inverse of a `K x M` matrix; the error carries the
/// reciprocal condition number when the Gram matrix is singular.
pub(crate) fn zero_forcing_matrix(g: &CMatrix) -> std::result::Result<CMatrix, f64> {
    let gram = g * g.adjoint();
    let rcond = hermitian_rcond(&gram);
    if !(rcond >= ZF_RCOND_THRESHOLD) {
        return Err(rcond);
    }
    let chol = hermitian_factor(&gram).ok_or(rcond)?;
    // Ĝ† (Ĝ Ĝ†)⁻¹ = ((Ĝ Ĝ†)⁻¹ Ĝ)†; its squared norm is tr{(Ĝ Ĝ†)⁻¹}.
    let unnormalized = chol.solve(g).adjoint();
    let norm = frobenius_sq(&unnormalized).sqrt();
    Ok(unnormalized / c(norm))
}

/// Multi-cell MMSE precoder with `γ = config.gamma`.
pub fn mcmmse_precoder(
    est: &ChannelEstimateSet,
    deltas: &ErrorCovScalars,
    betas: &GainTensor,
    config: &SystemConfig,
    l: usize,
) -> Result<Precoder> {
    regularized_precoder(est, deltas, betas, config, l, config.gamma, PrecoderKind::MultiCellMmse)
}

/// Single-cell MMSE (GPS) precoder: the multi-cell MMSE solution at `γ = 0`.
pub fn gps_precoder(
    est: &ChannelEstimateSet,
    deltas: &ErrorCovScalars,
    betas: &GainTensor,
    config: &SystemConfig,
    l: usize,
) -> Result<Precoder> {
    regularized_precoder(est, deltas, betas, config, l, 0.0, PrecoderKind::Gps)
}

/// `A_l = (1/α) (F̂_ll† F̂_ll + γ² Σ_{j≠l} F̂_jl† F̂_jl + η I_M)^{-1} F̂_ll†`
/// with `η = δ_ll + γ² Σ_{j≠l} δ_jl + K` and `α` fixing unit trace.
pub fn regularized_precoder(
    est: &ChannelEstimateSet,
    deltas: &ErrorCovScalars,
    betas: &GainTensor,
    config: &SystemConfig,
    l: usize,
    gamma: f64,
    kind: PrecoderKind,
) -> Result<Precoder> {
    check_inputs(est, betas, config, l)?;
    if deltas.num_cells() != config.num_cells {
        return Err(Error::ShapeMismatch("error scalars do not match the cell count".into()));
    }
    let m = config.antennas;
    let gamma_sq = gamma * gamma;
    let own = scaled_estimate(est, betas, config, l, l);
    let own_adj = own.adjoint();

    let mut eta = deltas.get(l, l) + config.users_per_cell as f64;
    let mut system = CMatrix::zeros(m, m);
    system.gemm(c(1.0), &own_adj, &own, c(0.0));
    for j in (0..config.num_cells).filter(|&j| j != l) {
        eta += gamma_sq * deltas.get(j, l);
        if gamma_sq > 0.0 {
            let f = scaled_estimate(est, betas, config, j, l);
            system.gemm(c(gamma_sq), &f.adjoint(), &f, c(1.0));
        }
    }
    for i in 0..m {
        system[(i, i)] += c(eta);
    }

    let chol = hermitian_factor(&system).ok_or_else(|| {
        Error::PreconditionViolated(format!("regularized system at cell {l} is not positive definite"))
    })?;
    let unnormalized = chol.solve(&own_adj);
    let alpha = frobenius_sq(&unnormalized).sqrt();
    if !(alpha > 0.0) {
        return Err(Error::PreconditionViolated(format!(
            "in-cell estimate at cell {l} is zero; precoder direction undefined"
        )));
    }
    Ok(Precoder {
        a: unnormalized / c(alpha),
        kind,
        params: Some(PrecoderParams { gamma, eta, alpha }),
    })
}

/// `F̂_ll† F̂_ll + γ² Σ_{j≠l} F̂_jl† F̂_jl + (δ_ll + γ² Σ_{j≠l} δ_jl) I_M`,
/// the conditional expectation of the weighted channel Gram matrix.
fn expected_gram(
    est: &ChannelEstimateSet,
    deltas: &ErrorCovScalars,
    betas: &GainTensor,
    config: &SystemConfig,
    l: usize,
    gamma: f64,
) -> CMatrix {
    let m = config.antennas;
    let gamma_sq = gamma * gamma;
    let own = scaled_estimate(est, betas, config, l, l);
    let mut q = own.adjoint() * &own;
    let mut reg = deltas.get(l, l);
    for j in (0..config.num_cells).filter(|&j| j != l) {
        let f = scaled_estimate(est, betas, config, j, l);
        q.gemm(c(gamma_sq), &f.adjoint(), &f, c(1.0));
        reg += gamma_sq * deltas.get(j, l);
    }
    for i in 0..m {
        q[(i, i)] += c(reg);
    }
    q
}

/// Expected multi-cell MMSE cost of precoder `a` with receiver scaling
/// `alpha`, given base station `l`'s estimates:
///
/// `J = α² tr{A† Q A} - 2α Re tr{F̂_ll A} + (α² + 1) K`
///
/// where `Q` is the expected weighted Gram matrix. Symbols, noise and
/// estimation error are averaged analytically.
#[allow(clippy::too_many_arguments)]
pub fn objective_value(
    a: &CMatrix,
    alpha: f64,
    est: &ChannelEstimateSet,
    deltas: &ErrorCovScalars,
    betas: &GainTensor,
    config: &SystemConfig,
    l: usize,
    gamma: f64,
) -> f64 {
    let q = expected_gram(est, deltas, betas, config, l, gamma);
    let own = scaled_estimate(est, betas, config, l, l);
    let quad = (a.adjoint() * &q * a).trace().re;
    let cross = (own * a).trace().re;
    let k = config.users_per_cell as f64;
    alpha * alpha * quad - 2.0 * alpha * cross + (alpha * alpha + 1.0) * k
}

/// Receiver scaling minimizing [`objective_value`] for a fixed precoder.
pub fn optimal_scaling(
    a: &CMatrix,
    est: &ChannelEstimateSet,
    deltas: &ErrorCovScalars,
    betas: &GainTensor,
    config: &SystemConfig,
    l: usize,
    gamma: f64,
) -> f64 {
    let q = expected_gram(est, deltas, betas, config, l, gamma);
    let own = scaled_estimate(est, betas, config, l, l);
    let quad = (a.adjoint() * &q * a).trace().re;
    let cross = (own * a).trace().re;
    cross / (quad + config.users_per_cell as f64)
}

/// Out-of-cell interference term of the multi-cell MMSE cost (without the
/// `γ²` weight): `α² Σ_{j≠l} E[‖F_jl A‖²] = α² Σ_{j≠l} (‖F̂_jl A‖² + δ_jl tr{A† A})`.
pub fn out_of_cell_interference(
    a: &CMatrix,
    alpha: f64,
    est: &ChannelEstimateSet,
    deltas: &ErrorCovScalars,
    betas: &GainTensor,
    config: &SystemConfig,
    l: usize,
) -> f64 {
    let power = frobenius_sq(a);
    let total: f64 = (0..config.num_cells)
        .filter(|&j| j != l)
        .map(|j| frobenius_sq(&(scaled_estimate(est, betas, config, j, l) * a)) + deltas.get(j, l) * power)
        .sum();
    alpha * alpha * total
}
