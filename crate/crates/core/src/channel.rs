//! Small-scale fading draws and the uplink training observation.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{complex_gaussian_matrix, scale_rows, CMatrix};
use crate::model::{GainTensor, PilotBook, SystemConfig};

/// Fading matrices `H_jl` (`K x M`): users of cell `j` to base station `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    num_cells: usize,
    h: Vec<CMatrix>,
}

impl ChannelSet {
    /// Wraps matrices given in `(j, l)` row-major order.
    pub fn from_matrices(num_cells: usize, h: Vec<CMatrix>) -> Result<Self> {
        if h.len() != num_cells * num_cells {
            return Err(Error::ShapeMismatch(format!(
                "expected {} channel matrices, got {}",
                num_cells * num_cells,
                h.len()
            )));
        }
        let shape = h[0].shape();
        if h.iter().any(|m| m.shape() != shape) {
            return Err(Error::ShapeMismatch("channel matrices differ in shape".into()));
        }
        Ok(Self { num_cells, h })
    }

    pub fn num_cells(&self) -> usize {
        self.num_cells
    }

    #[inline]
    pub fn get(&self, j: usize, l: usize) -> &CMatrix {
        &self.h[j * self.num_cells + l]
    }

    pub fn users_per_cell(&self) -> usize {
        self.h[0].nrows()
    }

    pub fn antennas(&self) -> usize {
        self.h[0].ncols()
    }
}

/// Draws all `L²` fading matrices with i.i.d. `CN(0, 1)` entries.
pub fn draw_channels<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> ChannelSet {
    let n = config.num_cells;
    let h = (0..n * n)
        .map(|_| complex_gaussian_matrix(rng, config.users_per_cell, config.antennas))
        .collect();
    ChannelSet { num_cells: n, h }
}

/// Whether the additive receiver noise `W_l` is included in training.
///
/// `Disabled` exists for exact algebraic checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrainingNoise {
    #[default]
    Enabled,
    Disabled,
}

/// Received training signals `Y_l` (`τ x M`), one per base station.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingObservation {
    y: Vec<CMatrix>,
}

impl TrainingObservation {
    pub fn y(&self, l: usize) -> &CMatrix {
        &self.y[l]
    }

    pub fn num_cells(&self) -> usize {
        self.y.len()
    }
}

/// `Y_l = √(p_r τ) Σ_j Ψ_j D_jl^{1/2} H_jl + W_l` for every base station `l`.
pub fn synth_training<R: Rng + ?Sized>(
    channels: &ChannelSet,
    pilots: &PilotBook,
    betas: &GainTensor,
    config: &SystemConfig,
    noise: TrainingNoise,
    rng: &mut R,
) -> Result<TrainingObservation> {
    betas.check_shape(config)?;
    pilots.check_shape(config)?;
    if channels.num_cells() != config.num_cells
        || channels.users_per_cell() != config.users_per_cell
        || channels.antennas() != config.antennas
    {
        return Err(Error::ShapeMismatch(format!(
            "channel set is {} cells of {}x{}, config expects {} cells of {}x{}",
            channels.num_cells(),
            channels.users_per_cell(),
            channels.antennas(),
            config.num_cells,
            config.users_per_cell,
            config.antennas
        )));
    }
    let (n, tau, m) = (config.num_cells, config.pilot_length, config.antennas);
    let amplitude = config.training_energy().sqrt();
    let y = (0..n)
        .map(|l| {
            let mut y = CMatrix::zeros(tau, m);
            for j in 0..n {
                let weighted = scale_rows(channels.get(j, l), &betas.sqrt_diag(j, l));
                y.gemm(amplitude.into(), pilots.psi(j), &weighted, 1.0.into());
            }
            if noise == TrainingNoise::Enabled {
                y += complex_gaussian_matrix(rng, tau, m);
            }
            y
        })
        .collect();
    Ok(TrainingObservation { y })
}
