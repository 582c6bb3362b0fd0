//! Exact rates for one user per cell, a pilot shared by every cell and
//! zero-forcing (matched-filter) precoding.
//!
//! With `κ_l = 1 + p_r τ Σ_i β_il`, the estimate `ĥ_jl` has per-entry variance
//! `c_jl = p_r τ β_jl / κ_l` and the error `h̃_jl` has per-entry variance
//! `e_jl = (1 + p_r τ Σ_{i≠j} β_il) / κ_l`. All moments then reduce to the
//! first two moments of `θ = ‖u‖`, `u ~ CN(0, I_M)`.

use statrs::function::gamma::ln_gamma;

use super::achievable_rate;
use crate::error::{Error, Result};
use crate::model::{GainTensor, SystemConfig};
use num_complex::Complex64;

/// Moments of `θ = sqrt(Σ_m |u_m|²)`, a chi variable with `2M` degrees of
/// freedom scaled by `1/√2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaMoments {
    /// `E[θ] = Γ(M + 1/2) / Γ(M)`.
    pub m1: f64,
    /// `E[θ²] = M`.
    pub m2: f64,
    /// `M - E[θ]²`.
    pub var: f64,
}

// Below this the log-gamma difference is taken directly.
const STIRLING_MIN: usize = 16;

/// Stirling correction `ln Γ(z) - [(z - 1/2) ln z - z + ln(2π)/2]`.
fn stirling_tail(z: f64) -> f64 {
    let z2 = z * z;
    let inv = 1.0 / z;
    let inv2 = 1.0 / z2;
    inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))))
}

/// `ln Γ(M + 1/2) - ln Γ(M) - ln(M)/2`, accurate to relative rounding error
/// for large `M` where the plain difference of log-gammas cancels.
fn log_ratio_excess(m: usize) -> f64 {
    let mf = m as f64;
    if m < STIRLING_MIN {
        ln_gamma(mf + 0.5) - ln_gamma(mf) - 0.5 * mf.ln()
    } else {
        mf * (0.5 / mf).ln_1p() - 0.5 + stirling_tail(mf + 0.5) - stirling_tail(mf)
    }
}

/// Moments of `θ` for `M ≥ 1` antennas, stable up to very large `M`.
pub fn theta_moments(m: usize) -> ThetaMoments {
    assert!(m >= 1, "theta moments need at least one antenna");
    let mf = m as f64;
    let excess = log_ratio_excess(m);
    let m1 = mf.sqrt() * excess.exp();
    // M - m1² = -M (exp(2 excess) - 1), avoiding the cancellation.
    let var = -mf * (2.0 * excess).exp_m1();
    ThetaMoments { m1, m2: mf, var }
}

fn check_single_user(betas: &GainTensor, config: &SystemConfig, j: usize) -> Result<()> {
    config.validate()?;
    betas.check_shape(config)?;
    if config.users_per_cell != 1 {
        return Err(Error::PreconditionViolated(format!(
            "closed-form rate needs one user per cell, got K = {}",
            config.users_per_cell
        )));
    }
    if j >= config.num_cells {
        return Err(Error::PreconditionViolated(format!("cell index {j} out of range")));
    }
    Ok(())
}

struct SharedPilotStats {
    /// `κ_l`.
    kappa: Vec<f64>,
    pt: f64,
}

impl SharedPilotStats {
    fn new(betas: &GainTensor, config: &SystemConfig) -> Self {
        let pt = config.training_energy();
        let n = config.num_cells;
        let kappa = (0..n)
            .map(|l| 1.0 + pt * (0..n).map(|i| betas.get(i, l, 0)).sum::<f64>())
            .collect();
        Self { kappa, pt }
    }

    /// Per-entry estimate variance `p_r τ β_jl / κ_l`.
    fn estimate_var(&self, betas: &GainTensor, j: usize, l: usize) -> f64 {
        self.pt * betas.get(j, l, 0) / self.kappa[l]
    }

    /// Per-entry error variance `(1 + p_r τ Σ_{i≠j} β_il) / κ_l`.
    fn error_var(&self, betas: &GainTensor, j: usize, l: usize) -> f64 {
        (self.kappa[l] - self.pt * betas.get(j, l, 0)) / self.kappa[l]
    }
}

/// Exact moments of the effective gains seen by the user of cell `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormMoments {
    /// `E[g^{j}_{j}]` (real and non-negative).
    pub signal_mean: f64,
    /// `E[|g^{j}_{j} - E g^{j}_{j}|²]`.
    pub signal_var: f64,
    /// `(l, E[|g^{j}_{l}|²])` for every `l ≠ j`.
    pub interference: Vec<(usize, f64)>,
}

impl ClosedFormMoments {
    pub fn rate(&self) -> f64 {
        let total: f64 = self.interference.iter().map(|(_, p)| p).sum();
        achievable_rate(Complex64::new(self.signal_mean, 0.0), self.signal_var, total)
    }
}

/// Signal mean and variance, and per-cell interference powers, for the user
/// of cell `j`, assembled term by term.
pub fn closed_form_moments(betas: &GainTensor, config: &SystemConfig, j: usize) -> Result<ClosedFormMoments> {
    check_single_user(betas, config, j)?;
    let s = SharedPilotStats::new(betas, config);
    let theta = theta_moments(config.antennas);
    let pf = config.forward_power;
    let own = pf * betas.get(j, j, 0);
    let signal_mean = (own * s.estimate_var(betas, j, j)).sqrt() * theta.m1;
    let signal_var = own * (s.estimate_var(betas, j, j) * theta.var + s.error_var(betas, j, j));
    let interference = (0..config.num_cells)
        .filter(|&l| l != j)
        .map(|l| {
            let gain = pf * betas.get(j, l, 0);
            (l, gain * (s.estimate_var(betas, j, l) * theta.m2 + s.error_var(betas, j, l)))
        })
        .collect();
    Ok(ClosedFormMoments {
        signal_mean,
        signal_var,
        interference,
    })
}

/// Exact achievable rate of the user in cell `j` for `M = config.antennas`:
///
/// `R_j = log2(1 + S / D)`, `S = p_f β_jj c_jj E[θ]²`,
/// `D = 1 + p_f β_jj c_jj Var{θ} + Σ_{l≠j} p_f β_jl c_jl M + Σ_l p_f β_jl e_jl`.
pub fn closed_form_rate(betas: &GainTensor, config: &SystemConfig, j: usize) -> Result<f64> {
    check_single_user(betas, config, j)?;
    let s = SharedPilotStats::new(betas, config);
    let theta = theta_moments(config.antennas);
    let pf = config.forward_power;
    let n = config.num_cells;
    let own = pf * betas.get(j, j, 0) * s.estimate_var(betas, j, j);
    let signal = own * theta.m1 * theta.m1;
    let contamination: f64 = (0..n)
        .filter(|&l| l != j)
        .map(|l| pf * betas.get(j, l, 0) * s.estimate_var(betas, j, l) * theta.m2)
        .sum();
    let error: f64 = (0..n).map(|l| pf * betas.get(j, l, 0) * s.error_var(betas, j, l)).sum();
    let denom = 1.0 + own * theta.var + contamination + error;
    Ok((signal / denom).ln_1p() / std::f64::consts::LN_2)
}

/// Large-antenna limit of [`closed_form_rate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AsymptoticRate {
    Finite(f64),
    /// No contaminating cell: the rate grows without bound in `M`.
    Unbounded,
}

impl AsymptoticRate {
    pub fn finite(self) -> Option<f64> {
        match self {
            AsymptoticRate::Finite(r) => Some(r),
            AsymptoticRate::Unbounded => None,
        }
    }
}

/// `lim_{M→∞} R_j = log2(1 + (β_jj²/κ_j) / Σ_{l≠j} (β_jl²/κ_l))`.
pub fn asymptotic_rate(betas: &GainTensor, config: &SystemConfig, j: usize) -> Result<AsymptoticRate> {
    check_single_user(betas, config, j)?;
    let s = SharedPilotStats::new(betas, config);
    let leakage: f64 = (0..config.num_cells)
        .filter(|&l| l != j)
        .map(|l| betas.get(j, l, 0).powi(2) / s.kappa[l])
        .sum();
    if leakage <= 0.0 {
        return Ok(AsymptoticRate::Unbounded);
    }
    let sir = betas.get(j, j, 0).powi(2) / s.kappa[j] / leakage;
    Ok(AsymptoticRate::Finite(sir.ln_1p() / std::f64::consts::LN_2))
}

/// `log2(1 + β_jj² / Σ_{l≠j} β_jl²)`, the large-`M` rate when training is
/// interference-limited and the received training power is equal across
/// cells.
pub fn interference_limited_rate(betas: &GainTensor, config: &SystemConfig, j: usize) -> Result<AsymptoticRate> {
    check_single_user(betas, config, j)?;
    let leakage: f64 = (0..config.num_cells)
        .filter(|&l| l != j)
        .map(|l| betas.get(j, l, 0).powi(2))
        .sum();
    if leakage <= 0.0 {
        return Ok(AsymptoticRate::Unbounded);
    }
    Ok(AsymptoticRate::Finite((betas.get(j, j, 0).powi(2) / leakage).log2_1p()))
}

trait Log2OnePlus {
    fn log2_1p(self) -> f64;
}

impl Log2OnePlus for f64 {
    fn log2_1p(self) -> f64 {
        self.ln_1p() / std::f64::consts::LN_2
    }
}
