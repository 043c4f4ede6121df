//! Periodic grids: box geometry, mode bookkeeping and the dealiasing rule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dealiasing rule applied after pseudo-spectral products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DealiasRule {
    None,
    #[default]
    TwoThirds,
}

/// Periodic box `Q = [−L/2, L/2]^d` discretized with `n` collocation points
/// per dimension. Samples are taken at `x_j = j·L/n`, one period of the torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Space dimension, 1 or 2.
    pub d: usize,
    /// Modes (collocation points) per dimension; even, ≥ 8.
    pub n: usize,
    /// Box side length.
    pub l: f64,
    /// Dealiasing rule for nonlinear products.
    pub dealias: DealiasRule,
}

impl GridSpec {
    pub fn new(d: usize, n: usize, l: f64, dealias: DealiasRule) -> Result<Self> {
        if d != 1 && d != 2 {
            return Err(Error::InvalidGrid(format!("d must be 1 or 2, got {d}")));
        }
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!("n must be even and >= 8, got {n}")));
        }
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::InvalidGrid(format!("L must be positive, got {l}")));
        }
        Ok(GridSpec { d, n, l, dealias })
    }

    /// Convenience constructor with the default two-thirds dealiasing.
    pub fn square(d: usize, n: usize, l: f64) -> Result<Self> {
        Self::new(d, n, l, DealiasRule::TwoThirds)
    }

    /// Total number of stored coefficients / collocation points.
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Fundamental wavenumber 2π/L.
    pub fn k0(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.l
    }

    /// Grid spacing L/n.
    pub fn dx(&self) -> f64 {
        self.l / self.n as f64
    }

    /// Quadrature weight (L/n)^d of the rectangle rule.
    pub fn quad_weight(&self) -> f64 {
        self.dx().powi(self.d as i32)
    }

    /// Box volume L^d.
    pub fn volume(&self) -> f64 {
        self.l.powi(self.d as i32)
    }

    /// Largest |k_i| kept by the dealiasing rule (n/2 − 1 when none).
    pub fn dealias_cutoff(&self) -> i64 {
        match self.dealias {
            DealiasRule::None => (self.n / 2) as i64 - 1,
            DealiasRule::TwoThirds => (self.n / 3) as i64,
        }
    }

    /// Integer frequency of FFT bin `j` along one axis,
    /// in `[-n/2, n/2)` with Nyquist mapped to −n/2.
    pub fn bin_to_mode(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    /// FFT bin of integer frequency `k` (any `k` with |k| ≤ n/2).
    pub fn mode_to_bin(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// Flat index of the coefficient with integer frequency vector `k`.
    pub fn coeff_index(&self, k: &[i64]) -> Result<usize> {
        if k.len() != self.d {
            return Err(Error::SizeMismatch { expected: self.d, got: k.len() });
        }
        let half = (self.n / 2) as i64;
        for &ki in k {
            if ki < -half || ki > half {
                return Err(Error::InvalidGrid(format!(
                    "mode {k:?} outside |k_i| <= {half}"
                )));
            }
        }
        Ok(match self.d {
            1 => self.mode_to_bin(k[0]),
            _ => self.mode_to_bin(k[0]) * self.n + self.mode_to_bin(k[1]),
        })
    }

    /// Integer frequency vector of flat coefficient index `idx`.
    pub fn index_modes(&self, idx: usize) -> Vec<i64> {
        match self.d {
            1 => vec![self.bin_to_mode(idx)],
            _ => vec![self.bin_to_mode(idx / self.n), self.bin_to_mode(idx % self.n)],
        }
    }

    /// |k|² as an integer, for flat index `idx`.
    pub fn mode_norm_sq(&self, idx: usize) -> i64 {
        match self.d {
            1 => {
                let k = self.bin_to_mode(idx);
                k * k
            }
            _ => {
                let k1 = self.bin_to_mode(idx / self.n);
                let k2 = self.bin_to_mode(idx % self.n);
                k1 * k1 + k2 * k2
            }
        }
    }

    /// κ² = (2π/L)²|k|² for flat index `idx`.
    pub fn kappa_sq(&self, idx: usize) -> f64 {
        let k0 = self.k0();
        k0 * k0 * self.mode_norm_sq(idx) as f64
    }

    /// Flat index of the frequency obtained by negating `idx`'s frequency.
    pub fn negated_index(&self, idx: usize) -> usize {
        let n = self.n;
        match self.d {
            1 => (n - idx) % n,
            _ => {
                let j1 = idx / n;
                let j2 = idx % n;
                ((n - j1) % n) * n + (n - j2) % n
            }
        }
    }

    /// True if the frequency of `idx` has a Nyquist component (k_i = −n/2).
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let half = self.n / 2;
        match self.d {
            1 => idx == half,
            _ => idx / self.n == half || idx % self.n == half,
        }
    }

    /// Physical coordinates of collocation point with flat index `g`.
    pub fn point(&self, g: usize) -> Vec<f64> {
        let dx = self.dx();
        match self.d {
            1 => vec![g as f64 * dx],
            _ => vec![(g / self.n) as f64 * dx, (g % self.n) as f64 * dx],
        }
    }

    pub fn same_geometry(&self, other: &GridSpec) -> bool {
        self.d == other.d && self.n == other.n && self.l == other.l
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::square(3, 16, 1.0).is_err());
        assert!(GridSpec::square(1, 15, 1.0).is_err());
        assert!(GridSpec::square(1, 4, 1.0).is_err());
        assert!(GridSpec::square(1, 16, 0.0).is_err());
        assert!(GridSpec::square(2, 16, 2.0).is_ok());
    }

    #[test]
    fn mode_bin_round_trip() {
        let g = GridSpec::square(1, 16, 1.0).unwrap();
        for j in 0..16 {
            let k = g.bin_to_mode(j);
            assert_eq!(g.mode_to_bin(k), j);
        }
        assert_eq!(g.bin_to_mode(8), -8); // Nyquist
        assert_eq!(g.mode_to_bin(8), 8); // +n/2 aliases onto the same bin
    }

    #[test]
    fn coeff_index_2d() {
        let g = GridSpec::square(2, 8, 1.0).unwrap();
        let idx = g.coeff_index(&[-1, 2]).unwrap();
        assert_eq!(g.index_modes(idx), vec![-1, 2]);
        assert_eq!(g.mode_norm_sq(idx), 5);
        assert!(g.coeff_index(&[5, 0]).is_err());
    }

    #[test]
    fn negation_pairs() {
        let g = GridSpec::square(2, 8, 1.0).unwrap();
        let idx = g.coeff_index(&[3, -2]).unwrap();
        let neg = g.negated_index(idx);
        assert_eq!(g.index_modes(neg), vec![-3, 2]);
        // Nyquist bins are their own negation.
        let ny = g.coeff_index(&[-4, 0]).unwrap();
        assert_eq!(g.negated_index(ny), ny);
        assert!(g.is_nyquist(ny));
    }
}
