//! Vector fields U = ∇φ: d-tuples of zero-mean scalar fields,
//! curl-free in two dimensions.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{NormKind, SpectralField};
use crate::grid::GridSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub components: Vec<SpectralField>,
}

impl VectorField {
    pub fn zeros(grid: GridSpec) -> Self {
        VectorField {
            components: (0..grid.d).map(|_| SpectralField::zeros(grid)).collect(),
        }
    }

    pub fn new(components: Vec<SpectralField>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidSpec("vector field needs components".into()));
        }
        let g = components[0].grid;
        if components.len() != g.d {
            return Err(Error::SizeMismatch { expected: g.d, got: components.len() });
        }
        if !components.iter().all(|c| c.grid.same_geometry(&g)) {
            return Err(Error::GridMismatch("vector components on different grids".into()));
        }
        Ok(VectorField { components })
    }

    /// Gradient of a scalar field: U = ∇φ.
    pub fn gradient_of(phi: &SpectralField) -> VectorField {
        let components = (1..=phi.grid.d).map(|axis| phi.differentiate(axis, 1)).collect();
        VectorField { components }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.components[0].grid
    }

    pub fn d(&self) -> usize {
        self.components.len()
    }

    /// div U = Σ_i ∂_i u_i.
    pub fn divergence(&self) -> SpectralField {
        let mut out = self.components[0].differentiate(1, 1);
        for (i, c) in self.components.iter().enumerate().skip(1) {
            out = out.add(&c.differentiate(i + 1, 1));
        }
        out
    }

    /// ‖∂_{x2}u₁ − ∂_{x1}u₂‖_{L²} (2D); zero in 1D.
    pub fn curl_l2(&self) -> f64 {
        if self.d() < 2 {
            return 0.0;
        }
        let curl = self.components[0]
            .differentiate(2, 1)
            .sub(&self.components[1].differentiate(1, 1));
        curl.norm(NormKind::L2).unwrap()
    }

    /// ‖∇U‖_{L²} = (Σ_{i,j} ‖∂_j u_i‖²)^{1/2}.
    pub fn grad_l2(&self) -> f64 {
        let mut acc = 0.0;
        for c in &self.components {
            for axis in 1..=self.d() {
                let d = c.differentiate(axis, 1);
                let n = d.norm(NormKind::L2).unwrap();
                acc += n * n;
            }
        }
        acc.sqrt()
    }

    /// Relative curl residual ‖curl U‖ / ‖∇U‖ (0 when ∇U = 0).
    pub fn curl_residual(&self) -> f64 {
        let g = self.grad_l2();
        if g == 0.0 {
            0.0
        } else {
            self.curl_l2() / g
        }
    }

    /// L²/Ḣ^s norms: square root of the component sum of squares.
    pub fn norm(&self, kind: NormKind) -> Result<f64> {
        match kind {
            NormKind::L2 | NormKind::Hs(_) => {
                let mut acc = 0.0;
                for c in &self.components {
                    let n = c.norm(kind)?;
                    acc += n * n;
                }
                Ok(acc.sqrt())
            }
            NormKind::Linf => {
                let mag = self.magnitude_samples();
                Ok(mag.iter().fold(0.0_f64, |m, &v| m.max(v)))
            }
            NormKind::Lp(p) => {
                if p < 1.0 {
                    return Err(Error::InvalidNorm(format!("Lp needs p >= 1, got {p}")));
                }
                let mag = self.magnitude_samples();
                let w = self.grid().quad_weight();
                Ok(mag.iter().map(|v| v.powf(p) * w).sum::<f64>().powf(1.0 / p))
            }
        }
    }

    /// Pointwise Euclidean magnitude |U(x_j)|.
    pub fn magnitude_samples(&self) -> Vec<f64> {
        let phys: Vec<Vec<f64>> = self.components.iter().map(|c| c.to_physical()).collect();
        (0..phys[0].len())
            .map(|j| phys.iter().map(|p| p[j] * p[j]).sum::<f64>().sqrt())
            .collect()
    }

    /// Fourier-space projection onto gradient fields (2D only):
    /// ĉ(k) ← (k·ĉ(k)/|k|²)·k for k ≠ 0. Idempotent; kills divergence-free
    /// parts; leaves true gradients untouched. In 1D this is a no-op.
    pub fn gradient_project(&self) -> VectorField {
        if self.d() != 2 {
            return self.clone();
        }
        let g = *self.grid();
        let n = g.n;
        let mut c1 = self.components[0].coeffs.clone();
        let mut c2 = self.components[1].coeffs.clone();
        for idx in 0..c1.len() {
            let k1 = g.bin_to_mode(idx / n) as f64;
            let k2 = g.bin_to_mode(idx % n) as f64;
            let ksq = k1 * k1 + k2 * k2;
            if ksq == 0.0 {
                continue;
            }
            let dot = c1[idx] * k1 + c2[idx] * k2;
            let s = dot / ksq;
            c1[idx] = s * k1;
            c2[idx] = s * k2;
        }
        let f1 = SpectralField { grid: g, coeffs: c1, zero_mean: self.components[0].zero_mean };
        let f2 = SpectralField { grid: g, coeffs: c2, zero_mean: self.components[1].zero_mean };
        f1.debug_check_hermitian();
        f2.debug_check_hermitian();
        VectorField { components: vec![f1, f2] }
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        VectorField {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> VectorField {
        VectorField { components: self.components.iter().map(|c| c.scale(s)).collect() }
    }

    pub fn has_non_finite(&self) -> bool {
        self.components.iter().any(|c| c.has_non_finite())
    }

    /// Reconstruct the zero-mean potential with ∇φ = U (assuming U is a
    /// gradient): φ̂(k) = −i k·Û(k) / (κ²) · (2π/L)⁻¹… in integer form
    /// φ̂(k) = (Σ_i k_i Û_i(k)) / (i·k0·|k|²).
    pub fn potential(&self) -> SpectralField {
        let g = *self.grid();
        let n = g.n;
        let k0 = g.k0();
        let mut coeffs = vec![Complex64::ZERO; g.len()];
        for idx in 0..coeffs.len() {
            let (k1, k2) = match g.d {
                1 => (g.bin_to_mode(idx) as f64, 0.0),
                _ => (g.bin_to_mode(idx / n) as f64, g.bin_to_mode(idx % n) as f64),
            };
            let ksq = k1 * k1 + k2 * k2;
            if ksq == 0.0 {
                continue;
            }
            let mut dot = self.components[0].coeffs[idx] * k1;
            if g.d == 2 {
                dot += self.components[1].coeffs[idx] * k2;
            }
            coeffs[idx] = dot / Complex64::new(0.0, k0 * ksq);
        }
        let out = SpectralField { grid: g, coeffs, zero_mean: true };
        out.debug_check_hermitian();
        out
    }
}
