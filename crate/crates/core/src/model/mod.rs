//! System configuration, large-scale gains, pilot books and the benchmark
//! scenario constructor.

mod config_file;

pub use config_file::ConfigFile;

use crate::error::{Error, Result};
use crate::linalg::{dft_unitary, CMatrix};

/// Scalar parameters of the multi-cell system.
///
/// Powers are linear and normalized to unit noise variance.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Number of cells `L`.
    pub num_cells: usize,
    /// Single-antenna users per cell `K`.
    pub users_per_cell: usize,
    /// Base-station antennas `M`.
    pub antennas: usize,
    /// Training length `τ`.
    pub pilot_length: usize,
    /// Forward-link (base station) power `p_f`.
    pub forward_power: f64,
    /// Reverse-link (user) power `p_r`.
    pub reverse_power: f64,
    /// Out-of-cell interference weight `γ` of the multi-cell MMSE precoder.
    pub gamma: f64,
    pub rng_seed: u64,
}

impl SystemConfig {
    /// Configuration with the given dimensions, `p_f = 20 dB`, `p_r = 10 dB`,
    /// `γ = 1` and seed 0.
    pub fn new(num_cells: usize, users_per_cell: usize, antennas: usize, pilot_length: usize) -> Self {
        Self {
            num_cells,
            users_per_cell,
            antennas,
            pilot_length,
            forward_power: db_to_linear(20.0),
            reverse_power: db_to_linear(10.0),
            gamma: 1.0,
            rng_seed: 0,
        }
    }

    /// The four-cell benchmark: `L = 4`, `M = 8`, `K = 2`, `τ = 4`.
    pub fn benchmark() -> Self {
        Self::new(4, 2, 8, 4)
    }

    pub fn with_powers(mut self, forward: f64, reverse: f64) -> Self {
        self.forward_power = forward;
        self.reverse_power = reverse;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn with_antennas(mut self, antennas: usize) -> Self {
        self.antennas = antennas;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("num_cells", self.num_cells),
            ("users_per_cell", self.users_per_cell),
            ("antennas", self.antennas),
            ("pilot_length", self.pilot_length),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if self.users_per_cell > self.antennas {
            return Err(Error::InvalidConfig(format!(
                "users_per_cell ({}) exceeds antennas ({})",
                self.users_per_cell, self.antennas
            )));
        }
        // p_r = 0 is allowed: it is the no-training limit of the error scalars.
        if !(self.forward_power > 0.0 && self.forward_power.is_finite()) {
            return Err(Error::InvalidConfig("forward_power must be positive".into()));
        }
        if !(self.reverse_power >= 0.0 && self.reverse_power.is_finite()) {
            return Err(Error::InvalidConfig("reverse_power must be non-negative".into()));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidConfig("gamma must be non-negative".into()));
        }
        Ok(())
    }

    /// `p_r τ`, the training energy per user.
    pub fn training_energy(&self) -> f64 {
        self.reverse_power * self.pilot_length as f64
    }
}

/// `10^(x/10)`.
pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

/// Large-scale gains `β[j][l][k]`: user `k` of cell `j` to base station `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct GainTensor {
    num_cells: usize,
    users_per_cell: usize,
    beta: Vec<f64>,
}

impl GainTensor {
    pub fn new(num_cells: usize, users_per_cell: usize, beta: Vec<f64>) -> Result<Self> {
        if beta.len() != num_cells * num_cells * users_per_cell {
            return Err(Error::ShapeMismatch(format!(
                "gain tensor needs {} entries, got {}",
                num_cells * num_cells * users_per_cell,
                beta.len()
            )));
        }
        if let Some(bad) = beta.iter().find(|b| !(**b >= 0.0 && b.is_finite())) {
            return Err(Error::InvalidScenario(format!("gain {bad} is not a finite non-negative value")));
        }
        Ok(Self {
            num_cells,
            users_per_cell,
            beta,
        })
    }

    pub fn from_fn(
        num_cells: usize,
        users_per_cell: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut beta = Vec::with_capacity(num_cells * num_cells * users_per_cell);
        for j in 0..num_cells {
            for l in 0..num_cells {
                for k in 0..users_per_cell {
                    beta.push(f(j, l, k));
                }
            }
        }
        Self::new(num_cells, users_per_cell, beta)
    }

    pub fn num_cells(&self) -> usize {
        self.num_cells
    }

    pub fn users_per_cell(&self) -> usize {
        self.users_per_cell
    }

    #[inline]
    pub fn get(&self, j: usize, l: usize, k: usize) -> f64 {
        self.beta[(j * self.num_cells + l) * self.users_per_cell + k]
    }

    /// Diagonal of `D_jl`.
    pub fn diag(&self, j: usize, l: usize) -> &[f64] {
        let start = (j * self.num_cells + l) * self.users_per_cell;
        &self.beta[start..start + self.users_per_cell]
    }

    /// Diagonal of `D_jl^{1/2}`.
    pub fn sqrt_diag(&self, j: usize, l: usize) -> Vec<f64> {
        self.diag(j, l).iter().map(|b| b.sqrt()).collect()
    }

    pub fn check_shape(&self, config: &SystemConfig) -> Result<()> {
        if self.num_cells != config.num_cells || self.users_per_cell != config.users_per_cell {
            return Err(Error::ShapeMismatch(format!(
                "gain tensor is {}x{}x{}, config expects {}x{}x{}",
                self.num_cells,
                self.num_cells,
                self.users_per_cell,
                config.num_cells,
                config.num_cells,
                config.users_per_cell
            )));
        }
        Ok(())
    }
}

/// Training matrices `Ψ_j` (`τ x K`, unit-norm columns), one per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotBook {
    psi: Vec<CMatrix>,
}

const UNIT_NORM_TOL: f64 = 1e-10;

impl PilotBook {
    pub fn new(psi: Vec<CMatrix>) -> Result<Self> {
        let Some(first) = psi.first() else {
            return Err(Error::InvalidScenario("pilot book is empty".into()));
        };
        let shape = first.shape();
        for (j, p) in psi.iter().enumerate() {
            if p.shape() != shape {
                return Err(Error::ShapeMismatch(format!(
                    "pilot matrix {j} is {:?}, expected {:?}",
                    p.shape(),
                    shape
                )));
            }
            for (k, col) in p.column_iter().enumerate() {
                let norm_sq: f64 = col.iter().map(|z| z.norm_sqr()).sum();
                if (norm_sq - 1.0).abs() > UNIT_NORM_TOL {
                    return Err(Error::InvalidScenario(format!(
                        "pilot column {k} of cell {j} has squared norm {norm_sq}"
                    )));
                }
            }
        }
        Ok(Self { psi })
    }

    pub fn num_cells(&self) -> usize {
        self.psi.len()
    }

    pub fn pilot_length(&self) -> usize {
        self.psi[0].nrows()
    }

    pub fn users_per_cell(&self) -> usize {
        self.psi[0].ncols()
    }

    pub fn psi(&self, j: usize) -> &CMatrix {
        &self.psi[j]
    }

    /// Whether `Ψ_j† Ψ_j = I_K` for every cell.
    pub fn is_within_cell_orthogonal(&self) -> bool {
        let k = self.users_per_cell();
        self.psi
            .iter()
            .all(|p| (p.adjoint() * p - CMatrix::identity(k, k)).norm() < 1e-10)
    }

    pub fn check_shape(&self, config: &SystemConfig) -> Result<()> {
        if self.num_cells() != config.num_cells
            || self.pilot_length() != config.pilot_length
            || self.users_per_cell() != config.users_per_cell
        {
            return Err(Error::ShapeMismatch(format!(
                "pilot book has {} cells of {}x{}, config expects {} cells of {}x{}",
                self.num_cells(),
                self.pilot_length(),
                self.users_per_cell(),
                config.num_cells,
                config.pilot_length,
                config.users_per_cell
            )));
        }
        Ok(())
    }
}

/// Cross-gain levels and pilot reuse layout of a scenario.
///
/// Cells are grouped into adjacent pairs `(0,1), (2,3), ...`. Gains are 1 from
/// a user to its own base station, `a` across a pair and `b` otherwise.
/// `pilot_reuse_map[j]` selects the pool of orthogonal pilots cell `j` uses.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub cross_gain_a: f64,
    pub cross_gain_b: f64,
    pub pilot_reuse_map: Vec<usize>,
}

impl ScenarioSpec {
    /// Paired layout where the two cells of a pair use different pools and the
    /// pools are reused by every pair (cells 1,3 share one pool, 2,4 the other).
    pub fn paired(a: f64, b: f64, num_cells: usize) -> Self {
        Self {
            cross_gain_a: a,
            cross_gain_b: b,
            pilot_reuse_map: (0..num_cells).map(|j| j % 2).collect(),
        }
    }

    /// Every cell uses the same pilot pool.
    pub fn shared_pilot(a: f64, b: f64, num_cells: usize) -> Self {
        Self {
            cross_gain_a: a,
            cross_gain_b: b,
            pilot_reuse_map: vec![0; num_cells],
        }
    }

    /// Each cell gets its own pool (no pilot reuse).
    pub fn orthogonal(a: f64, b: f64, num_cells: usize) -> Self {
        Self {
            cross_gain_a: a,
            cross_gain_b: b,
            pilot_reuse_map: (0..num_cells).collect(),
        }
    }

    fn gain(&self, j: usize, l: usize) -> f64 {
        if j == l {
            1.0
        } else if j / 2 == l / 2 {
            self.cross_gain_a
        } else {
            self.cross_gain_b
        }
    }
}

/// Builds the gain tensor and pilot book of a scenario.
///
/// Pool `p` takes columns `pK .. pK + K` of the `τ x τ` unitary DFT matrix, so
/// distinct pools are mutually orthogonal.
pub fn build_scenario(spec: &ScenarioSpec, config: &SystemConfig) -> Result<(GainTensor, PilotBook)> {
    config.validate()?;
    let (l, k, tau) = (config.num_cells, config.users_per_cell, config.pilot_length);
    if tau < k {
        return Err(Error::InvalidScenario(format!(
            "training length {tau} is shorter than users per cell {k}"
        )));
    }
    if l > 1 && l % 2 != 0 {
        return Err(Error::InvalidScenario(format!(
            "paired cell layout needs an even number of cells, got {l}"
        )));
    }
    for (name, v) in [("a", spec.cross_gain_a), ("b", spec.cross_gain_b)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidScenario(format!("cross gain {name} = {v} outside [0, 1]")));
        }
    }
    if spec.pilot_reuse_map.len() != l {
        return Err(Error::InvalidScenario(format!(
            "pilot reuse map has {} entries for {l} cells",
            spec.pilot_reuse_map.len()
        )));
    }
    let pools = tau / k;
    if let Some(&bad) = spec.pilot_reuse_map.iter().find(|&&p| p >= pools) {
        return Err(Error::InvalidScenario(format!(
            "reuse map references pool {bad}, only {pools} orthogonal pools fit in τ = {tau}"
        )));
    }

    let betas = GainTensor::from_fn(l, k, |j, cell, _| spec.gain(j, cell))?;
    let dft = dft_unitary(tau);
    let psi = spec
        .pilot_reuse_map
        .iter()
        .map(|&pool| dft.columns(pool * k, k).into_owned())
        .collect();
    Ok((betas, PilotBook::new(psi)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> SystemConfig {
        SystemConfig::new(4, 2, 8, 4)
    }

    #[test]
    fn db_examples() {
        assert!((db_to_linear(20.0) - 100.0).abs() < 1e-12);
        assert_eq!(db_to_linear(0.0), 1.0);
        assert!((db_to_linear(10.0) - 10.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn db_is_multiplicative(a in -60.0f64..60.0, b in -60.0f64..60.0) {
            let lhs = db_to_linear(a) * db_to_linear(b);
            let rhs = db_to_linear(a + b);
            prop_assert!(((lhs - rhs) / rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn benchmark_pattern() {
        let (betas, pilots) = build_scenario(&ScenarioSpec::paired(0.8, 0.08, 4), &cfg()).unwrap();
        for k in 0..2 {
            assert_eq!(betas.get(0, 0, k), 1.0);
            assert_eq!(betas.get(0, 1, k), 0.8);
            assert_eq!(betas.get(0, 2, k), 0.08);
            assert_eq!(betas.get(2, 3, k), 0.8);
            assert_eq!(betas.get(3, 2, k), 0.8);
            assert_eq!(betas.get(1, 3, k), 0.08);
        }
        assert_eq!(pilots.psi(0), pilots.psi(2));
        assert_eq!(pilots.psi(1), pilots.psi(3));
        assert_ne!(pilots.psi(0), pilots.psi(1));
        assert!(pilots.is_within_cell_orthogonal());
    }

    #[test]
    fn pooled_pilots_are_jointly_orthogonal() {
        let (_, pilots) = build_scenario(&ScenarioSpec::paired(0.8, 0.08, 4), &cfg()).unwrap();
        let mut joint = CMatrix::zeros(4, 4);
        joint.columns_mut(0, 2).copy_from(pilots.psi(0));
        joint.columns_mut(2, 2).copy_from(pilots.psi(1));
        let err = (joint.adjoint() * &joint - CMatrix::identity(4, 4)).norm();
        assert!(err < 1e-12);
    }

    #[test]
    fn degenerate_cross_gains() {
        let (iso, _) = build_scenario(&ScenarioSpec::paired(0.0, 0.0, 4), &cfg()).unwrap();
        let (full, _) = build_scenario(&ScenarioSpec::paired(1.0, 1.0, 4), &cfg()).unwrap();
        for j in 0..4 {
            for l in 0..4 {
                for k in 0..2 {
                    assert_eq!(iso.get(j, l, k), if j == l { 1.0 } else { 0.0 });
                    assert_eq!(full.get(j, l, k), 1.0);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn pattern_is_symmetric(a in 0.0f64..=1.0, b in 0.0f64..=1.0, half in 1usize..4) {
            let c = SystemConfig::new(2 * half, 2, 8, 4);
            let (betas, _) = build_scenario(&ScenarioSpec::paired(a, b, 2 * half), &c).unwrap();
            for j in 0..2 * half {
                for l in 0..2 * half {
                    for k in 0..2 {
                        prop_assert_eq!(betas.get(j, l, k), betas.get(l, j, k));
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_short_training() {
        let c = SystemConfig::new(4, 4, 8, 2);
        assert!(matches!(
            build_scenario(&ScenarioSpec::paired(0.5, 0.1, 4), &c),
            Err(Error::InvalidScenario(_))
        ));
    }

    #[test]
    fn rejects_missing_pool() {
        // τ = 4, K = 2: only pools 0 and 1 exist.
        let spec = ScenarioSpec::orthogonal(0.5, 0.1, 4);
        assert!(matches!(build_scenario(&spec, &cfg()), Err(Error::InvalidScenario(_))));
    }

    #[test]
    fn rejects_odd_cell_count() {
        let c = SystemConfig::new(3, 1, 4, 2);
        assert!(build_scenario(&ScenarioSpec::shared_pilot(0.5, 0.1, 3), &c).is_err());
        let single = SystemConfig::new(1, 1, 4, 1);
        assert!(build_scenario(&ScenarioSpec::shared_pilot(0.5, 0.1, 1), &single).is_ok());
    }

    #[test]
    fn config_validation() {
        assert!(SystemConfig::new(2, 3, 2, 4).validate().is_err());
        assert!(SystemConfig::new(2, 1, 2, 4).with_gamma(-1.0).validate().is_err());
        assert!(SystemConfig::new(2, 1, 2, 4).with_powers(0.0, 1.0).validate().is_err());
        assert!(SystemConfig::benchmark().validate().is_ok());
    }

    #[test]
    fn gain_tensor_rejects_negative() {
        assert!(GainTensor::new(1, 1, vec![-0.1]).is_err());
        assert!(GainTensor::new(2, 1, vec![1.0; 3]).is_err());
    }

    #[test]
    fn pilot_book_rejects_non_unit_columns() {
        let p = CMatrix::from_element(2, 1, crate::linalg::c(1.0));
        assert!(PilotBook::new(vec![p]).is_err());
    }
}
