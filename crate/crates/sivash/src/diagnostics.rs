//! Dissipativity diagnostics: positive-part α_p functionals, the α_p
//! differential inequality and its upper solution, absorbing-ball
//! detection over ensembles, mean-ODE residuals and linear growth-rate
//! fits.
//!
//! The α_p machinery follows the a-priori estimates: with
//! w_i = (∂_{x_i} u_i)⁺ and α_p = Σ_i ‖w_i‖_{L^p}^p, trajectories obey
//!
//! ```text
//! α̇_p ≤ p·α_p − (p−2)/(2L²)^{1/p} · α_p^{(p+1)/p},
//! ```
//!
//! whose upper solution gives the uniform bound
//! α_p(t)^{1/p} ≤ (2L²)^{1/p}·2p/(p−2) for t ≥ 1. The constant ρ of the
//! dissipativity theorem is not computable from the analysis; it is
//! replaced by the empirical plateau radius plus a uniformity-in-IC-scale
//! test, which is the falsifiable content.

use serde::Serialize;

use crate::colehopf::phi_from_psi;
use crate::error::{Error, Result};
use crate::field::{sample_lp, NormKind};
use crate::models::{Form, ModelSpec, ScalarState, State};
use crate::timestep::Trajectory;
use crate::vector::VectorField;

/// Per-time diagnostics row. `mean_residual` is filled in post-processing
/// (centered differences need both neighbors).
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub l2_u: f64,
    pub h1_u: f64,
    pub linf_phi: f64,
    pub alpha_p: f64,
    pub mean: f64,
    pub mean_residual: f64,
    pub curl_residual: f64,
    /// ½⟨|∇φ|²⟩, the drift term of the mean ODE.
    pub mean_gradsq_half: f64,
    /// max_x |U(x)| when available (drives the advective CFL warning).
    pub linf_u_sample: Option<f64>,
}

/// α_p(U) = Σ_i ‖(∂_{x_i}u_i)⁺‖_{L^p}^p (single-term analogue in 1D).
pub fn alpha_p(u: &VectorField, p: u32) -> f64 {
    assert!(p >= 3, "alpha_p needs p >= 3");
    let grid = *u.grid();
    let w = grid.quad_weight();
    let mut total = 0.0;
    for (i, comp) in u.components.iter().enumerate() {
        let pos = comp.differentiate(i + 1, 1).positive_part();
        total += pos.iter().map(|v| v.powi(p as i32) * w).sum::<f64>();
    }
    total
}

/// Upper-solution bound ᾱ_p(t)^{1/p} = (2L²)^{1/p}·(2p/(p−2))·max(t⁻¹, 1);
/// constant (2L²)^{1/p}·2p/(p−2) for t ≥ 1.
pub fn alpha_upper_bound(p: u32, l: f64, t: f64) -> Result<f64> {
    if p <= 2 {
        return Err(Error::InvalidSpec(format!("upper bound needs p > 2, got {p}")));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidSpec(format!("upper bound needs t > 0, got {t}")));
    }
    let pf = p as f64;
    let level = (2.0 * l * l).powf(1.0 / pf) * 2.0 * pf / (pf - 2.0);
    Ok(level * t.recip().max(1.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct AlphaInequalityReport {
    pub p: u32,
    /// max over interior times of α̇_p − RHS(α_p).
    pub max_residual: f64,
    /// The pointwise tolerance 0.05·max(1, p·α_p) at the worst time.
    pub tol_at_worst: f64,
    pub pass: bool,
}

/// Check the differential inequality along a recorded trajectory by
/// centered differences of the α_p column. `l` is the box side (records
/// carry no grid).
pub fn check_alpha_inequality(traj: &Trajectory, p: u32, l: f64) -> Result<AlphaInequalityReport> {
    let recs = &traj.records;
    if recs.len() < 3 {
        return Err(Error::InsufficientSampling("need at least 3 records".into()));
    }
    let cadence = recs[1].t - recs[0].t;
    if cadence > 0.01 + 1e-12 {
        return Err(Error::InsufficientSampling(format!(
            "diag cadence {cadence} exceeds 0.01"
        )));
    }
    let pf = p as f64;
    let coeff = (pf - 2.0) / (2.0 * l * l).powf(1.0 / pf);
    let mut max_residual = f64::NEG_INFINITY;
    let mut tol_at_worst = 0.0;
    let mut pass = true;
    for i in 1..recs.len() - 1 {
        let dt = recs[i + 1].t - recs[i - 1].t;
        let da = (recs[i + 1].alpha_p - recs[i - 1].alpha_p) / dt;
        let a = recs[i].alpha_p;
        let rhs = pf * a - coeff * a.powf((pf + 1.0) / pf);
        let residual = da - rhs;
        let tol = 0.05 * (1.0_f64).max(pf * a);
        if residual > max_residual {
            max_residual = residual;
            tol_at_worst = tol;
        }
        if residual > tol {
            pass = false;
        }
    }
    Ok(AlphaInequalityReport { p, max_residual, tol_at_worst, pass })
}

/// Empirical absorbing-ball estimate from an ensemble of trajectories.
#[derive(Debug, Clone, Serialize)]
pub struct AbsorbingBallEstimate {
    pub radius_h1: f64,
    pub entry_time: f64,
    /// Tail window (time units) used for plateau detection.
    pub window: f64,
    pub ensemble: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
pub struct AbsorbingConfig {
    /// Fraction of the horizon treated as the plateau window.
    pub window_frac: f64,
    /// Relative band above the plateau that still counts as "entered".
    pub tol: f64,
    /// Absolute floor so decaying-to-zero ensembles report ρ → 0.
    pub abs_floor: f64,
}

impl Default for AbsorbingConfig {
    fn default() -> Self {
        AbsorbingConfig { window_frac: 0.25, tol: 0.05, abs_floor: 0.0 }
    }
}

/// Entry detection on the ensemble sup of the Ḣ¹ norm of U.
/// ρ_emp = sup over members and t ≥ T_emp; T_emp = earliest time after
/// which the sup stays within (1+tol) of its tail plateau (or below the
/// absolute floor).
pub fn absorbing_entry(
    trajs: &[Trajectory],
    cfg: &AbsorbingConfig,
) -> Result<AbsorbingBallEstimate> {
    if trajs.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let n_rec = trajs[0].records.len();
    if n_rec < 4 {
        return Err(Error::NoPlateau("too few records".into()));
    }
    if !trajs.iter().all(|t| t.records.len() == n_rec) {
        return Err(Error::NoPlateau("ensemble cadences differ".into()));
    }
    let times: Vec<f64> = trajs[0].records.iter().map(|r| r.t).collect();
    let sup: Vec<f64> = (0..n_rec)
        .map(|i| trajs.iter().map(|t| t.records[i].h1_u).fold(0.0_f64, f64::max))
        .collect();
    let t_end = *times.last().unwrap();
    let window = cfg.window_frac * t_end;
    let tail_start = t_end - window;
    let plateau = times
        .iter()
        .zip(&sup)
        .filter(|(t, _)| **t >= tail_start)
        .map(|(_, s)| *s)
        .fold(0.0_f64, f64::max);
    let threshold = ((1.0 + cfg.tol) * plateau).max(cfg.abs_floor);
    // earliest index from which the sup never exceeds the threshold
    let mut entry_idx = n_rec;
    for i in (0..n_rec).rev() {
        if sup[i] <= threshold {
            entry_idx = i;
        } else {
            break;
        }
    }
    if entry_idx == n_rec || times[entry_idx] > 0.75 * t_end {
        return Err(Error::NoPlateau(format!(
            "sup norm has not settled by t = {:.3} (threshold {threshold:.3e})",
            0.75 * t_end
        )));
    }
    let entry_time = times[entry_idx];
    let radius = sup[entry_idx..].iter().fold(0.0_f64, |m, &v| m.max(v));
    Ok(AbsorbingBallEstimate {
        radius_h1: radius,
        entry_time,
        window,
        ensemble: (0..trajs.len()).collect(),
    })
}

/// Ordinary least squares for y = slope·x + intercept with R².
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub n: usize,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return Err(Error::InvalidSpec("fit needs >= 2 points of equal length".into()));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = xs[i] - mx;
        let dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::InvalidSpec("degenerate abscissa in fit".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(LineFit { slope, intercept, r2, n })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GrowthFit {
    pub omega: f64,
    pub r2: f64,
    pub residual: f64,
}

/// Least-squares slope of log|c_k(t)| over a trajectory's snapshots.
/// Errors if the run left the linear regime (relative second-harmonic
/// content above 1e−6).
pub fn growth_rate_fit(traj: &Trajectory, k: &[i64]) -> Result<GrowthFit> {
    let mut ts = Vec::new();
    let mut logs = Vec::new();
    let mut max_amp = 0.0_f64;
    let mut max_second = 0.0_f64;
    let k2: Vec<i64> = k.iter().map(|ki| 2 * ki).collect();
    for (t, state) in &traj.snapshots {
        let field = match state {
            State::Scalar(s) => &s.field,
            State::Primal(u) => &u.components[0],
        };
        let amp = field.coeff(k)?.norm();
        max_amp = max_amp.max(amp);
        if let Ok(c2) = field.coeff(&k2) {
            max_second = max_second.max(c2.norm());
        }
        if amp > 0.0 {
            ts.push(*t);
            logs.push(amp.ln());
        }
    }
    if max_amp > 0.0 && max_second > 1e-6 * max_amp {
        return Err(Error::NonlinearContamination(format!(
            "second harmonic at {:.3e} of the fundamental",
            max_second / max_amp
        )));
    }
    let fit = fit_line(&ts, &logs)?;
    // rms deviation of the fit
    let mut rss = 0.0;
    for i in 0..ts.len() {
        let e = logs[i] - (fit.slope * ts[i] + fit.intercept);
        rss += e * e;
    }
    Ok(GrowthFit {
        omega: fit.slope,
        r2: fit.r2,
        residual: (rss / ts.len() as f64).sqrt(),
    })
}

/// Max over a trajectory of the filled mean-ODE residual.
pub fn mean_residual(traj: &Trajectory) -> f64 {
    traj.records.iter().map(|r| r.mean_residual).fold(0.0, f64::max)
}

/// Fill `mean_residual` by differencing the recorded mean against the
/// form's own mean law: dm̄/dt = −a·m̄ − ½⟨|∇φ|²⟩ with a = 1 for the
/// adopted variants and a = 0 for the plain ones. Endpoints use one-sided
/// differences. Primal runs carry no mean; the residual stays 0.
pub fn fill_mean_residuals(records: &mut [DiagnosticsRecord], spec: &ModelSpec) {
    let a = match spec.form {
        Form::IntegratedAdopted | Form::Colehopf => 1.0,
        Form::IntegratedPlain | Form::ColehopfPlain => 0.0,
        Form::Primal => return,
    };
    let n = records.len();
    if n < 3 {
        return;
    }
    // centered differences only; the endpoints stay at 0 (a one-sided
    // difference is O(h) and would swamp the interior O(h²) residuals)
    for i in 1..n - 1 {
        let d = (records[i + 1].mean - records[i - 1].mean)
            / (records[i + 1].t - records[i - 1].t);
        records[i].mean_residual =
            (d + a * records[i].mean + records[i].mean_gradsq_half).abs();
    }
}

/// Build the diagnostics row for a state. The potential φ and velocity U
/// are derived per form (primal states reconstruct a zero-mean potential;
/// Cole–Hopf states are pulled back through the transform).
pub fn record_for_state(
    t: f64,
    state: &State,
    spec: &ModelSpec,
    p: u32,
) -> Result<DiagnosticsRecord> {
    let (u, phi): (VectorField, ScalarState) = match (state, spec.form) {
        (State::Primal(u), _) => {
            let phi = ScalarState { field: u.potential(), mean: 0.0 };
            (u.clone(), phi)
        }
        (State::Scalar(s), f) if f.is_colehopf() => {
            let phi = phi_from_psi(s)?;
            (VectorField::gradient_of(&phi.field), phi)
        }
        (State::Scalar(s), _) => (VectorField::gradient_of(&s.field), s.clone()),
    };
    let l2_u = u.norm(NormKind::L2)?;
    let h1_u = u.norm(NormKind::Hs(1.0))?;
    let grid = *u.grid();
    let linf_phi = phi
        .full_samples()
        .iter()
        .fold(0.0_f64, |m, &v| m.max(v.abs()));
    let a = alpha_p(&u, p);
    let curl = if grid.d == 2 && matches!(state, State::Primal(_)) {
        u.curl_residual()
    } else {
        0.0
    };
    let mean_gradsq_half = 0.5 * l2_u * l2_u / grid.volume();
    let linf_u = u.magnitude_samples().into_iter().fold(0.0_f64, f64::max);
    let rec = DiagnosticsRecord {
        t,
        l2_u,
        h1_u,
        linf_phi,
        alpha_p: a,
        mean: phi.mean,
        mean_residual: 0.0,
        curl_residual: curl,
        mean_gradsq_half,
        linf_u_sample: Some(linf_u),
    };
    for v in [rec.l2_u, rec.h1_u, rec.linf_phi, rec.alpha_p, rec.mean] {
        if !v.is_finite() {
            return Err(Error::NonFinite("diagnostics record".into()));
        }
    }
    Ok(rec)
}

/// ‖(div U)⁺‖_{L²} — uniformly bounded along trajectories per the
/// dissipativity analysis; reported by the CLI and asserted in tests.
pub fn div_positive_l2(u: &VectorField) -> f64 {
    let grid = *u.grid();
    let pos = u.divergence().positive_part();
    sample_lp(&pos, &grid, 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::ic::mode_field;
    use std::f64::consts::PI;

    /// u₁ = sin(x₁), u₂ = 0 on L = 2π: α₄ = ∫∫ (cos⁺x₁)⁴ = 2π·(3π/8).
    #[test]
    fn alpha_p_closed_form() {
        let g = GridSpec::square(2, 64, 2.0 * PI).unwrap();
        let u1 = mode_field(g, &[(vec![1, 0], 1.0, -PI / 2.0)]); // sin(x₁)
        let u2 = crate::field::SpectralField::zeros(g);
        let u = VectorField::new(vec![u1, u2]).unwrap();
        let a4 = alpha_p(&u, 4);
        let expect = 2.0 * PI * 3.0 * PI / 8.0;
        assert!((a4 - expect).abs() < 1e-6 * expect, "{a4} vs {expect}");
        // zero field → 0
        assert_eq!(alpha_p(&VectorField::zeros(g), 4), 0.0);
        // homogeneity: α_p(cU) = c^p α_p(U)
        let a4_scaled = alpha_p(&u.scale(2.0), 4);
        assert!((a4_scaled - 16.0 * a4).abs() < 1e-9 * a4_scaled);
    }

    #[test]
    fn upper_bound_values() {
        // p = 4, L = 2π, t ≥ 1: (8π²)^{1/4}·4 ≈ 11.92
        let b = alpha_upper_bound(4, 2.0 * PI, 1.0).unwrap();
        let expect = (8.0 * PI * PI).powf(0.25) * 4.0;
        assert!((b - expect).abs() < 1e-12);
        assert!((b - 11.92).abs() < 0.01, "{b}");
        assert_eq!(alpha_upper_bound(4, 2.0 * PI, 7.0).unwrap(), b);
        // t → 0⁺ scales like t⁻¹
        let b01 = alpha_upper_bound(4, 2.0 * PI, 0.1).unwrap();
        assert!((b01 - 10.0 * b).abs() < 1e-9);
        // p = 3: (8π²)^{1/3}·6
        let b3 = alpha_upper_bound(3, 2.0 * PI, 2.0).unwrap();
        assert!((b3 - (8.0 * PI * PI).powf(1.0 / 3.0) * 6.0).abs() < 1e-12);
        assert!(alpha_upper_bound(2, 1.0, 1.0).is_err());
    }

    #[test]
    fn line_fit_recovers_slope() {
        let xs: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| -3.0 * x + 0.7).collect();
        let fit = fit_line(&xs, &ys).unwrap();
        assert!((fit.slope + 3.0).abs() < 1e-12);
        assert!((fit.intercept - 0.7).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
    }
}
