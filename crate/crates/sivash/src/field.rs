//! Real periodic scalar fields stored as Fourier coefficients.
//!
//! A field is `f(x) = Σ_k c(k) e^{2πik·x/L}` with dense complex storage over
//! the full FFT bin range (|k_i| ≤ n/2, Nyquist one-sided at −n/2). Real
//! valuedness is the Hermitian symmetry invariant `c(−k) = conj(c(k))`,
//! enforced on every physical→spectral transform and checked by debug
//! assertions after coefficient-space operations.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{DealiasRule, GridSpec};
use crate::multiplier::MultiplierSymbol;

thread_local! {
    static PLANS: RefCell<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> =
        RefCell::new(HashMap::new());
}

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|p| {
        p.borrow_mut()
            .entry((n, forward))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                let dir = if forward { FftDirection::Forward } else { FftDirection::Inverse };
                planner.plan_fft(n, dir)
            })
            .clone()
    })
}

/// In-place unnormalized DFT over each dimension of `data` (length n^d).
fn fft_nd(data: &mut [Complex64], grid: &GridSpec, forward: bool) {
    let n = grid.n;
    let fft = plan(n, forward);
    match grid.d {
        1 => fft.process(data),
        _ => {
            // rows (contiguous along axis 2)
            for row in data.chunks_exact_mut(n) {
                fft.process(row);
            }
            // columns
            let mut col = vec![Complex64::ZERO; n];
            for j2 in 0..n {
                for j1 in 0..n {
                    col[j1] = data[j1 * n + j2];
                }
                fft.process(&mut col);
                for j1 in 0..n {
                    data[j1 * n + j2] = col[j1];
                }
            }
        }
    }
}

/// Norm kinds understood by [`SpectralField::norm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    L2,
    Linf,
    /// L^p by rectangle-rule quadrature on the collocation grid.
    Lp(f64),
    /// Homogeneous Sobolev seminorm Ḣ^s by Parseval.
    Hs(f64),
}

/// Real periodic scalar field in coefficient space.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub grid: GridSpec,
    /// Dense coefficients in FFT bin order, length `grid.len()`.
    pub coeffs: Vec<Complex64>,
    /// Semantic flag: c(0) is pinned to zero.
    pub zero_mean: bool,
}

impl SpectralField {
    /// The zero field.
    pub fn zeros(grid: GridSpec) -> Self {
        SpectralField { grid, coeffs: vec![Complex64::ZERO; grid.len()], zero_mean: true }
    }

    /// Build from raw coefficients (must already be Hermitian-symmetric).
    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::SizeMismatch { expected: grid.len(), got: coeffs.len() });
        }
        let f = SpectralField { grid, coeffs, zero_mean: false };
        f.debug_check_hermitian();
        Ok(f)
    }

    /// Physical→spectral transform with Hermitian symmetrization:
    /// c(k) ← ½(ĉ(k) + conj(ĉ(−k))).
    pub fn from_samples(grid: GridSpec, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::SizeMismatch { expected: grid.len(), got: samples.len() });
        }
        let mut data: Vec<Complex64> =
            samples.iter().map(|&s| Complex64::new(s, 0.0)).collect();
        fft_nd(&mut data, &grid, true);
        let scale = 1.0 / grid.len() as f64;
        for c in data.iter_mut() {
            *c *= scale;
        }
        let coeffs: Vec<Complex64> = (0..data.len())
            .map(|i| 0.5 * (data[i] + data[grid.negated_index(i)].conj()))
            .collect();
        Ok(SpectralField { grid, coeffs, zero_mean: false })
    }

    /// Spectral→physical: samples at the collocation points x_j = jL/n.
    pub fn to_physical(&self) -> Vec<f64> {
        let mut data = self.coeffs.clone();
        fft_nd(&mut data, &self.grid, false);
        data.into_iter().map(|c| c.re).collect()
    }

    /// Set a single coefficient pair: c(k) = v, c(−k) = conj(v).
    /// At k = 0 or a pure-Nyquist self-paired mode, the real part of v is used.
    pub fn set_pair(&mut self, k: &[i64], v: Complex64) -> Result<()> {
        let idx = self.grid.coeff_index(k)?;
        let neg = self.grid.negated_index(idx);
        if idx == neg {
            self.coeffs[idx] = Complex64::new(v.re, 0.0);
        } else {
            self.coeffs[idx] = v;
            self.coeffs[neg] = v.conj();
        }
        if k.iter().all(|&ki| ki == 0) {
            self.zero_mean = v.re == 0.0 && v.im == 0.0;
        }
        Ok(())
    }

    /// Coefficient at integer frequency `k` (|k_i| ≤ n/2; +n/2 aliases −n/2).
    pub fn coeff(&self, k: &[i64]) -> Result<Complex64> {
        Ok(self.coeffs[self.grid.coeff_index(k)?])
    }

    /// ∂^order/∂x_axis^order via coefficient-wise (2πik_axis/L)^order.
    /// Odd orders zero the one-sided Nyquist components to keep the field real.
    pub fn differentiate(&self, axis: usize, order: u32) -> SpectralField {
        assert!(axis >= 1 && axis <= self.grid.d, "axis out of range");
        assert!(order >= 1);
        let g = &self.grid;
        let k0 = g.k0();
        let n = g.n;
        let half = n / 2;
        let mut coeffs = self.coeffs.clone();
        for (idx, c) in coeffs.iter_mut().enumerate() {
            let j = match (g.d, axis) {
                (1, _) => idx,
                (_, 1) => idx / n,
                _ => idx % n,
            };
            if order % 2 == 1 && j == half {
                *c = Complex64::ZERO;
                continue;
            }
            let k = g.bin_to_mode(j) as f64;
            let ik = Complex64::new(0.0, k0 * k);
            *c *= ik.powu(order);
        }
        let out = SpectralField { grid: self.grid, coeffs, zero_mean: true };
        out.debug_check_hermitian();
        out
    }

    /// Laplacian Δ = Σ_i ∂²_i via the real symbol −κ².
    pub fn laplacian(&self) -> SpectralField {
        let mut coeffs = self.coeffs.clone();
        for (idx, c) in coeffs.iter_mut().enumerate() {
            *c *= -self.grid.kappa_sq(idx);
        }
        SpectralField { grid: self.grid, coeffs, zero_mean: true }
    }

    /// Apply the Fourier multiplier T: c(k) ← m(k)·c(k); m(0) = 0.
    pub fn apply_multiplier(&self, symbol: &MultiplierSymbol) -> Result<SpectralField> {
        let g = &self.grid;
        let mut coeffs = self.coeffs.clone();
        for (idx, c) in coeffs.iter_mut().enumerate() {
            let k = g.index_modes(idx);
            *c *= symbol.m(&k, g)?;
        }
        let out = SpectralField { grid: self.grid, coeffs, zero_mean: true };
        out.debug_check_hermitian();
        Ok(out)
    }

    /// Mean ⟨f⟩ = c(0).
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// Zero c(0).
    pub fn subtract_mean(&self) -> SpectralField {
        let mut out = self.clone();
        out.coeffs[0] = Complex64::ZERO;
        out.zero_mean = true;
        out
    }

    /// Pointwise max(f, 0) on the collocation grid. Stays in physical space:
    /// the positive part is not band-limited and must not be re-encoded.
    pub fn positive_part(&self) -> Vec<f64> {
        self.to_physical().into_iter().map(|s| s.max(0.0)).collect()
    }

    /// Zero every coefficient with any |k_i| > n/3 (two-thirds rule).
    /// With `DealiasRule::None` the field is returned unchanged.
    pub fn dealias(&self) -> SpectralField {
        match self.grid.dealias {
            DealiasRule::None => self.clone(),
            DealiasRule::TwoThirds => {
                let cut = (self.grid.n / 3) as i64;
                let g = &self.grid;
                let mut coeffs = self.coeffs.clone();
                for (idx, c) in coeffs.iter_mut().enumerate() {
                    if g.index_modes(idx).iter().any(|k| k.abs() > cut) {
                        *c = Complex64::ZERO;
                    }
                }
                SpectralField { grid: self.grid, coeffs, zero_mean: self.zero_mean }
            }
        }
    }

    /// Norms. L²/Ḣ^s by Parseval with the explicit L^d factor,
    /// L^p/L^∞ by rectangle-rule quadrature of grid samples.
    pub fn norm(&self, kind: NormKind) -> Result<f64> {
        match kind {
            NormKind::L2 => {
                let s: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
                Ok((self.grid.volume() * s).sqrt())
            }
            NormKind::Hs(s) => {
                if s < 0.0 && self.coeffs[0].norm() > 1e-14 {
                    return Err(Error::InvalidNorm(format!(
                        "Hs with s = {s} < 0 requires a zero-mean field"
                    )));
                }
                let mut acc = 0.0;
                for (idx, c) in self.coeffs.iter().enumerate() {
                    if idx == 0 {
                        if s == 0.0 {
                            acc += c.norm_sqr();
                        }
                        continue;
                    }
                    acc += self.grid.kappa_sq(idx).powf(s) * c.norm_sqr();
                }
                Ok((self.grid.volume() * acc).sqrt())
            }
            NormKind::Linf => Ok(self
                .to_physical()
                .iter()
                .fold(0.0_f64, |m, &v| m.max(v.abs()))),
            NormKind::Lp(p) => {
                if p < 1.0 {
                    return Err(Error::InvalidNorm(format!("Lp needs p >= 1, got {p}")));
                }
                let w = self.grid.quad_weight();
                let s: f64 = self.to_physical().iter().map(|v| v.abs().powf(p) * w).sum();
                Ok(s.powf(1.0 / p))
            }
        }
    }

    /// Pointwise product of two fields, dealiased per the grid rule.
    pub fn multiply_dealiased(&self, other: &SpectralField) -> Result<SpectralField> {
        if !self.grid.same_geometry(&other.grid) {
            return Err(Error::GridMismatch("product of fields on different grids".into()));
        }
        let a = self.to_physical();
        let b = other.to_physical();
        let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        Ok(SpectralField::from_samples(self.grid, &prod)?.dealias())
    }

    // -- elementwise arithmetic ------------------------------------------

    pub fn add(&self, other: &SpectralField) -> SpectralField {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        SpectralField { grid: self.grid, coeffs, zero_mean: self.zero_mean && other.zero_mean }
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        SpectralField { grid: self.grid, coeffs, zero_mean: self.zero_mean && other.zero_mean }
    }

    pub fn scale(&self, s: f64) -> SpectralField {
        let coeffs = self.coeffs.iter().map(|c| c * s).collect();
        SpectralField { grid: self.grid, coeffs, zero_mean: self.zero_mean }
    }

    /// True if any coefficient is NaN/∞.
    pub fn has_non_finite(&self) -> bool {
        self.coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite())
    }

    /// Debug-build check of the real-field invariant c(−k) = conj(c(k)).
    pub fn debug_check_hermitian(&self) {
        #[cfg(debug_assertions)]
        {
            let scale = self
                .coeffs
                .iter()
                .fold(0.0_f64, |m, c| m.max(c.norm()))
                .max(1.0);
            for idx in 0..self.coeffs.len() {
                let neg = self.grid.negated_index(idx);
                let diff = (self.coeffs[idx] - self.coeffs[neg].conj()).norm();
                debug_assert!(
                    diff <= 1e-12 * scale,
                    "Hermitian symmetry violated at idx {idx}: diff {diff:.3e}"
                );
            }
        }
    }
}

/// Rectangle-rule integral of grid samples: Σ f_j (L/n)^d.
pub fn quadrature(samples: &[f64], grid: &GridSpec) -> f64 {
    let w = grid.quad_weight();
    samples.iter().sum::<f64>() * w
}

/// Rectangle-rule L^p norm of raw samples.
pub fn sample_lp(samples: &[f64], grid: &GridSpec, p: f64) -> f64 {
    let w = grid.quad_weight();
    samples
        .iter()
        .map(|v| v.abs().powf(p) * w)
        .sum::<f64>()
        .powf(1.0 / p)
}
