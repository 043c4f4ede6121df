//! The Cole–Hopf transform Ψ : φ ↦ ψ = e^{−φ/2}, its inverse, the
//! transformed nonlinearity N, the prepared (cut-off) nonlinearity N_P,
//! radii estimation for the transformed absorbing set, and Lipschitz
//! probing of N_P.
//!
//! Preparation makes N total on Ḣ¹: a smooth radial cutoff in the Ḣ¹
//! seminorm of the mean-free part scales N down to zero outside twice the
//! inner radius, and a pointwise clamp keeps the log argument positive for
//! probe states far from the transformed absorbing set. Inside the set the
//! cutoff is 1 and the clamp inactive, so N_P = N there and the dynamics
//! inside the absorbing ball are unchanged.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::field::{NormKind, SpectralField};
use crate::ic::random_smooth;
use crate::models::{nonlinear_colehopf, ModelSpec, ScalarState, EPS_POS};

/// Radii of the absorbing set B (for φ) and its transform 𝓑 = Ψ(B).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TransformRadii {
    /// Ḣ² radius of the φ absorbing set.
    pub r: f64,
    /// L^∞ radius of the φ absorbing set.
    pub r_inf: f64,
    /// Pointwise lower bracket r0 = e^{−r_inf/2}.
    pub r0: f64,
    /// Pointwise upper bracket r1 = e^{r_inf/2}.
    pub r1: f64,
    /// Ḣ² radius bound of 𝓑.
    pub r2: f64,
}

impl TransformRadii {
    fn from_extremes(r: f64, r_inf: f64, r2: f64) -> Self {
        TransformRadii {
            r,
            r_inf,
            r0: (-r_inf / 2.0).exp(),
            r1: (r_inf / 2.0).exp(),
            r2,
        }
    }
}

/// ψ = e^{−φ/2}: pointwise exponential on the grid, re-encoded spectrally.
/// ψ is not zero-mean; its mean rides in the scalar slot.
pub fn psi_from_phi(phi: &ScalarState) -> ScalarState {
    let samples = phi.full_samples();
    let psi: Vec<f64> = samples.iter().map(|v| (-0.5 * v).exp()).collect();
    let f = SpectralField::from_samples(phi.field.grid, &psi)
        .expect("grid sizes match by construction");
    ScalarState::from_full(&f)
}

/// φ = −2 log ψ; errors with PositivityLost if ψ has a grid value below
/// the positivity margin.
pub fn phi_from_psi(psi: &ScalarState) -> Result<ScalarState> {
    let samples = psi.full_samples();
    let min = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < EPS_POS {
        return Err(Error::PositivityLost { min, eps: EPS_POS });
    }
    let phi: Vec<f64> = samples.iter().map(|v| -2.0 * v.ln()).collect();
    let f = SpectralField::from_samples(psi.field.grid, &phi)?;
    Ok(ScalarState::from_full(&f))
}

/// Velocity field carried by a Cole–Hopf state: U = −2∇ψ/ψ, the pointwise
/// form of ∇(Ψ⁻¹ψ). Gradient-projected in 2D, zero-mean.
pub fn u_from_psi(psi: &ScalarState) -> Result<crate::vector::VectorField> {
    let samples = psi.full_samples();
    let min = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < EPS_POS {
        return Err(Error::PositivityLost { min, eps: EPS_POS });
    }
    let grid = psi.field.grid;
    let full = psi.full_field();
    let mut comps = Vec::with_capacity(grid.d);
    for axis in 1..=grid.d {
        let dpsi = full.differentiate(axis, 1).to_physical();
        let vals: Vec<f64> = dpsi.iter().zip(&samples).map(|(dp, s)| -2.0 * dp / s).collect();
        let mut f = SpectralField::from_samples(grid, &vals)?;
        f.coeffs[0] = num_complex::Complex64::ZERO;
        f.zero_mean = true;
        comps.push(f);
    }
    let u = crate::vector::VectorField { components: comps };
    Ok(if grid.d == 2 { u.gradient_project() } else { u })
}

/// Transformed nonlinearity N(ψ) as a full (non-split) field, so that
/// rhs_colehopf(ψ) = Δψ + N(ψ) holds by construction.
pub fn nonlinearity_n(psi: &ScalarState, spec: &ModelSpec) -> Result<SpectralField> {
    let (field, mean) = nonlinear_colehopf(psi, spec)?;
    let mut full = field;
    full.coeffs[0] = num_complex::Complex64::new(mean, 0.0);
    full.zero_mean = mean == 0.0;
    Ok(full)
}

/// Smoothstep cutoff profile: θ ≡ 1 on [0,1], θ ≡ 0 on [2,∞),
/// θ(s) = 1 − S(s−1) with S(σ) = 3σ² − 2σ³ in between. |θ'| ≤ 3/2 ≤ 2.
pub fn theta(s: f64) -> f64 {
    if s <= 1.0 {
        1.0
    } else if s >= 2.0 {
        0.0
    } else {
        let sigma = s - 1.0;
        1.0 - (3.0 * sigma * sigma - 2.0 * sigma * sigma * sigma)
    }
}

/// Prepared nonlinearity: cutoff radii, clamp bracket, probed constants.
#[derive(Debug, Clone)]
pub struct PreparedNonlinearity {
    pub radii: TransformRadii,
    /// Ḣ¹ radius inside which N_P = N (set to r2).
    pub inner_radius: f64,
    /// Ḣ¹ radius outside which N_P = 0 (2·r2).
    pub outer_radius: f64,
    /// Probed Lipschitz constant of N_P in Ḣ¹.
    pub c_est: f64,
    /// Model (symbol + forcing) the nonlinearity was prepared from.
    pub spec: ModelSpec,
}

impl PreparedNonlinearity {
    pub fn new(radii: TransformRadii, spec: ModelSpec) -> Result<Self> {
        if !spec.form.is_colehopf() {
            return Err(Error::InvalidSpec(
                "prepared nonlinearity requires a colehopf-form spec".into(),
            ));
        }
        if !(radii.r2 > 0.0) {
            return Err(Error::InvalidSpec("inner radius must be positive".into()));
        }
        Ok(PreparedNonlinearity {
            radii,
            inner_radius: radii.r2,
            outer_radius: 2.0 * radii.r2,
            c_est: 0.0,
            spec,
        })
    }

    /// Cutoff argument s = ‖ψ − ψ̄‖_{Ḣ¹} / inner_radius.
    pub fn cutoff_arg(&self, psi: &ScalarState) -> f64 {
        let h1 = psi.field.norm(NormKind::Hs(1.0)).expect("zero-mean field");
        h1 / self.inner_radius
    }

    /// Pointwise clamp of the grid values into [r0/2, 2·r1], making the
    /// log in N total. Inactive on the transformed absorbing set.
    pub fn clamp(&self, psi: &ScalarState) -> ScalarState {
        let lo = 0.5 * self.radii.r0;
        let hi = 2.0 * self.radii.r1;
        let samples = psi.full_samples();
        let clamped: Vec<f64> = samples.iter().map(|v| v.clamp(lo, hi)).collect();
        if clamped == samples {
            return psi.clone();
        }
        let f = SpectralField::from_samples(psi.field.grid, &clamped)
            .expect("grid sizes match by construction");
        ScalarState::from_full(&f)
    }

    /// N_P(ψ) = θ(‖ψ − ψ̄‖_{Ḣ¹}/inner)·N(clamp(ψ)); defined on all of Ḣ¹.
    pub fn n_p(&self, psi: &ScalarState) -> Result<SpectralField> {
        let s = self.cutoff_arg(psi);
        if s >= 2.0 {
            return Ok(SpectralField::zeros(self.spec.grid));
        }
        let n = nonlinearity_n(&self.clamp(psi), &self.spec)?;
        Ok(n.scale(theta(s)))
    }

    /// Split variant for the time stepper: (zero-mean part, mean part).
    pub fn n_p_split(&self, psi: &ScalarState) -> Result<(SpectralField, f64)> {
        let full = self.n_p(psi)?;
        let mean = full.mean();
        Ok((full.subtract_mean(), mean))
    }
}

/// Estimate the transform radii from an ensemble of post-transient φ states:
/// r = max Ḣ², r_inf = max L^∞, r2 = max Ḣ² over the Ψ-images. The Ḣ²
/// chain bound ‖Δψ‖ ≤ C·r1(‖Δφ‖ + ‖∇φ‖‖Δφ‖) is cross-checked empirically
/// and the largest observed ratio returned alongside.
pub fn estimate_radii(ensemble: &[ScalarState]) -> Result<(TransformRadii, f64)> {
    if ensemble.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let mut r: f64 = 0.0;
    let mut r_inf: f64 = 0.0;
    let mut r2: f64 = 0.0;
    let mut max_ratio: f64 = 0.0;
    for phi in ensemble {
        let h2 = phi.field.norm(NormKind::Hs(2.0))?;
        let linf = phi
            .full_samples()
            .iter()
            .fold(0.0_f64, |m, &v| m.max(v.abs()));
        r = r.max(h2);
        r_inf = r_inf.max(linf);
        let psi = psi_from_phi(phi);
        let psi_h2 = psi.field.norm(NormKind::Hs(2.0))?;
        r2 = r2.max(psi_h2);
        // Lemma-style chain: ‖Δψ‖ ≤ C r1 (‖Δφ‖ + ‖∇φ‖‖Δφ‖)
        let dphi = phi.field.norm(NormKind::Hs(2.0))?;
        let gphi = phi.field.norm(NormKind::Hs(1.0))?;
        let bound = (linf / 2.0).exp() * (dphi + gphi * dphi);
        if bound > 0.0 {
            max_ratio = max_ratio.max(psi_h2 / bound);
        }
    }
    Ok((TransformRadii::from_extremes(r, r_inf, r2), max_ratio))
}

/// Stratum of the probe sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeStratum {
    /// Both states inside the cutoff's inner ball (θ = 1).
    InBall,
    /// Norms straddling [inner, 2·inner] where the cutoff slope lives.
    Boundary,
    /// Both states outside the outer radius (N_P = 0).
    FarField,
    /// One in-ball state paired with one far-field state.
    Mixed,
}

const STRATA: [ProbeStratum; 4] = [
    ProbeStratum::InBall,
    ProbeStratum::Boundary,
    ProbeStratum::FarField,
    ProbeStratum::Mixed,
];

#[derive(Debug, Clone, Serialize)]
pub struct StratumReport {
    pub stratum: ProbeStratum,
    pub pairs: usize,
    pub skipped: usize,
    pub c_est: f64,
    pub sup_n: f64,
}

/// Result of a Lipschitz probe of N_P.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub c_est: f64,
    pub n_pairs: usize,
    pub seed: u64,
    pub strata: Vec<StratumReport>,
    /// sup over all probed states of ‖N_P‖_{Ḣ¹} (boundedness check).
    pub sup_n: f64,
}

fn probe_state(
    prep: &PreparedNonlinearity,
    rng_seed: u64,
    stream: u64,
    target_lo: f64,
    target_hi: f64,
) -> ScalarState {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(rng_seed);
    rng.set_stream(stream);
    let norm: f64 = rng.random_range(target_lo..target_hi);
    let slope: f64 = rng.random_range(1.0..3.0);
    let seed: u64 = rng.random();
    let field = random_smooth(prep.spec.grid, seed, norm.max(1e-12), slope);
    // mean sampled around the transformed set's bracket
    let mean: f64 = rng.random_range(prep.radii.r0.min(0.5)..prep.radii.r1.max(1.5));
    ScalarState { field, mean }
}

/// Max-ratio Lipschitz probe of N_P over `n_pairs` seeded pairs drawn from
/// in-ball / boundary / far-field / mixed strata. Deterministic in `seed`;
/// pairs are evaluated in parallel.
pub fn lipschitz_probe(
    prep: &PreparedNonlinearity,
    seed: u64,
    n_pairs: usize,
) -> Result<ProbeReport> {
    let inner = prep.inner_radius;
    let per_pair = |i: usize| -> Result<(ProbeStratum, Option<f64>, f64)> {
        let stratum = STRATA[i % STRATA.len()];
        let (lo1, hi1, lo2, hi2) = match stratum {
            ProbeStratum::InBall => (0.0, inner, 0.0, inner),
            ProbeStratum::Boundary => (0.8 * inner, 2.2 * inner, 0.8 * inner, 2.2 * inner),
            ProbeStratum::FarField => (2.0 * inner, 4.0 * inner, 2.0 * inner, 4.0 * inner),
            ProbeStratum::Mixed => (0.0, inner, 2.0 * inner, 4.0 * inner),
        };
        let a = probe_state(prep, seed, (2 * i) as u64, lo1, hi1);
        let b = probe_state(prep, seed, (2 * i + 1) as u64, lo2, hi2);
        let denom = a.field.sub(&b.field).norm(NormKind::Hs(1.0))?;
        let na = prep.n_p(&a)?;
        let nb = prep.n_p(&b)?;
        let sup = na
            .subtract_mean()
            .norm(NormKind::Hs(1.0))?
            .max(nb.subtract_mean().norm(NormKind::Hs(1.0))?);
        if denom < 1e-12 {
            return Ok((stratum, None, sup)); // degenerate pair, skipped
        }
        let num = na.sub(&nb).subtract_mean().norm(NormKind::Hs(1.0))?;
        Ok((stratum, Some(num / denom), sup))
    };
    let results = exec::map_indexed(n_pairs, per_pair);
    let mut strata: Vec<StratumReport> = STRATA
        .iter()
        .map(|&s| StratumReport { stratum: s, pairs: 0, skipped: 0, c_est: 0.0, sup_n: 0.0 })
        .collect();
    let mut c_est: f64 = 0.0;
    let mut sup_n: f64 = 0.0;
    for r in results {
        let (stratum, ratio, sup) = r?;
        let entry = strata.iter_mut().find(|e| e.stratum == stratum).unwrap();
        entry.pairs += 1;
        entry.sup_n = entry.sup_n.max(sup);
        sup_n = sup_n.max(sup);
        match ratio {
            Some(v) => {
                entry.c_est = entry.c_est.max(v);
                c_est = c_est.max(v);
            }
            None => entry.skipped += 1,
        }
    }
    Ok(ProbeReport { c_est, n_pairs, seed, strata, sup_n })
}
