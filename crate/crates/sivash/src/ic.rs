//! Reproducible initial conditions.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::{NormKind, SpectralField};
use crate::grid::GridSpec;

/// Random smooth zero-mean scalar field: c(k) ∝ |k|^{−slope} e^{iθ_k} with
/// seeded uniform phases, truncated at |k| ≤ n/4, normalized to `amplitude`
/// in Ḣ¹. Deterministic in (grid, seed).
pub fn random_smooth(grid: GridSpec, seed: u64, amplitude: f64, slope: f64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zeros(grid);
    let cut = (grid.n / 4) as i64;
    let cut_sq = cut * cut;
    // One representative per Hermitian pair, visited in a fixed order.
    match grid.d {
        1 => {
            for k in 1..=cut {
                let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let amp = (k as f64).powf(-slope);
                f.set_pair(&[k], Complex64::from_polar(amp, theta)).unwrap();
            }
        }
        _ => {
            // Half-space: k1 > 0, or (k1 == 0 and k2 > 0).
            for k1 in 0..=cut {
                let k2_lo = if k1 == 0 { 1 } else { -cut };
                for k2 in k2_lo..=cut {
                    if k1 * k1 + k2 * k2 > cut_sq {
                        continue;
                    }
                    let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    let ksq = (k1 * k1 + k2 * k2) as f64;
                    let amp = ksq.powf(-slope / 2.0);
                    f.set_pair(&[k1, k2], Complex64::from_polar(amp, theta)).unwrap();
                }
            }
        }
    }
    let h1 = f.norm(NormKind::Hs(1.0)).unwrap();
    if h1 > 0.0 {
        f = f.scale(amplitude / h1);
    }
    f.zero_mean = true;
    f
}

/// Sum of explicit cosine modes: φ = Σ amp·cos(2πk·x/L + phase), zero-mean.
pub fn mode_field(grid: GridSpec, modes: &[(Vec<i64>, f64, f64)]) -> SpectralField {
    let mut f = SpectralField::zeros(grid);
    for (k, amp, phase) in modes {
        let existing = f.coeff(k).unwrap_or(Complex64::ZERO);
        let c = existing + Complex64::from_polar(0.5 * amp, *phase);
        f.set_pair(k, c).unwrap();
    }
    f.zero_mean = f.coeffs[0].norm() == 0.0;
    f
}
