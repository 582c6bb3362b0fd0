//! Achievable downlink rates under the worst-case Gaussian-noise bound.
//!
//! For user `k` of cell `j` with effective gains `g^{jk}_{li}` the bound is
//!
//! `R_jk = log2(1 + |E[g^{jk}_{jk}]|² / (1 + Var{g^{jk}_{jk}} + Σ_{(l,i)≠(j,k)} E[|g^{jk}_{li}|²]))`.
//!
//! [`monte_carlo_rates`] estimates the moments by simulation for any
//! precoder; [`closed_form_rate`] and [`asymptotic_rate`] evaluate them
//! exactly for one user per cell, a shared pilot and zero-forcing.

mod closed_form;
mod monte_carlo;

pub use closed_form::{
    asymptotic_rate, closed_form_moments, closed_form_rate, interference_limited_rate, theta_moments,
    AsymptoticRate, ClosedFormMoments, ThetaMoments,
};
pub use monte_carlo::{effective_gains, monte_carlo_rates, CsiMode, MonteCarlo, DEFAULT_CHUNK_SIZE};

use num_complex::Complex64;

/// `log2(1 + |mean|² / (1 + var + interference))`.
pub fn achievable_rate(signal_mean: Complex64, signal_var: f64, interference: f64) -> f64 {
    (signal_mean.norm_sqr() / (1.0 + signal_var + interference)).ln_1p() / std::f64::consts::LN_2
}

/// Mean interference power `E[|g^{jk}_{li}|²]` from one precoder column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceTerm {
    /// Interfering base station `l`.
    pub cell: usize,
    /// Precoder column (intended user) `i`.
    pub user: usize,
    pub power: f64,
    pub stderr: f64,
}

/// Estimated moments and rate of one user.
#[derive(Debug, Clone, PartialEq)]
pub struct UserMoments {
    pub cell: usize,
    pub user: usize,
    /// `E[g^{jk}_{jk}]`.
    pub signal_mean: Complex64,
    /// `E[|g - E g|²]`.
    pub signal_var: f64,
    /// All `(l, i) ≠ (j, k)` terms, ordered by `(l, i)`.
    pub interference: Vec<InterferenceTerm>,
    pub signal_mean_stderr: f64,
    pub signal_var_stderr: f64,
    pub rate: f64,
    /// Delta-method standard error of `rate`.
    pub rate_stderr: f64,
}

impl UserMoments {
    pub fn total_interference(&self) -> f64 {
        self.interference.iter().map(|t| t.power).sum()
    }

    /// Re-evaluates the rate bound from the stored moments.
    pub fn recompute_rate(&self) -> f64 {
        achievable_rate(self.signal_mean, self.signal_var, self.total_interference())
    }
}

/// Per-user moments and rates for one precoding method.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub method: crate::precoding::PrecoderKind,
    pub trials: u64,
    /// Users in `(cell, user)` order.
    pub users: Vec<UserMoments>,
}

impl RateReport {
    pub fn user(&self, cell: usize, user: usize) -> Option<&UserMoments> {
        self.users.iter().find(|u| u.cell == cell && u.user == user)
    }

    /// The worst user; ties go to the first in `(cell, user)` order.
    pub fn worst_user(&self) -> &UserMoments {
        self.users
            .iter()
            .fold(None::<&UserMoments>, |best, u| match best {
                Some(b) if b.rate <= u.rate => Some(b),
                _ => Some(u),
            })
            .expect("report has at least one user")
    }

    pub fn min_rate(&self) -> f64 {
        self.worst_user().rate
    }

    pub fn min_rate_stderr(&self) -> f64 {
        self.worst_user().rate_stderr
    }
}
