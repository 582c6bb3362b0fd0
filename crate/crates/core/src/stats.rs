//! Streaming mean / covariance accumulators with an associative merge.

/// Running mean and co-moment matrix of `D`-dimensional samples
/// (Welford update, Chan et al. merge).
#[derive(Debug, Clone, PartialEq)]
pub struct Moments<const D: usize> {
    count: u64,
    mean: [f64; D],
    comoment: [[f64; D]; D],
}

impl<const D: usize> Default for Moments<D> {
    fn default() -> Self {
        Self {
            count: 0,
            mean: [0.0; D],
            comoment: [[0.0; D]; D],
        }
    }
}

impl<const D: usize> Moments<D> {
    pub fn push(&mut self, x: [f64; D]) {
        self.count += 1;
        let n = self.count as f64;
        let mut delta = [0.0; D];
        for d in 0..D {
            delta[d] = x[d] - self.mean[d];
            self.mean[d] += delta[d] / n;
        }
        for a in 0..D {
            for b in 0..D {
                self.comoment[a][b] += delta[a] * (x[b] - self.mean[b]);
            }
        }
    }

    pub fn merge(&mut self, other: &Self) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let mut delta = [0.0; D];
        for d in 0..D {
            delta[d] = other.mean[d] - self.mean[d];
            self.mean[d] += delta[d] * nb / n;
        }
        for a in 0..D {
            for b in 0..D {
                self.comoment[a][b] += other.comoment[a][b] + delta[a] * delta[b] * na * nb / n;
            }
        }
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> [f64; D] {
        self.mean
    }

    /// Unbiased sample covariance (zero with fewer than two samples).
    pub fn covariance(&self) -> [[f64; D]; D] {
        let mut cov = [[0.0; D]; D];
        if self.count < 2 {
            return cov;
        }
        let denom = (self.count - 1) as f64;
        for a in 0..D {
            for b in 0..D {
                cov[a][b] = self.comoment[a][b] / denom;
            }
        }
        cov
    }

    /// Standard error of the linear functional `w · mean`.
    pub fn stderr_of(&self, w: [f64; D]) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        let cov = self.covariance();
        let mut v = 0.0;
        for a in 0..D {
            for b in 0..D {
                v += w[a] * cov[a][b] * w[b];
            }
        }
        (v.max(0.0) / self.count as f64).sqrt()
    }
}
