//! Right-hand sides for the three equivalent formulations, the mean ODE,
//! and the linear dispersion relation.
//!
//! Primal:      ∂_t U = −(U·∇)U + ΔU + TU + ∇G,  U = ∇φ (curl-free in 2D).
//! Integrated:  φ_t = −⟨φ⟩ − ½|∇φ|² + Δφ + Tφ + G   (adopted variant;
//!              the plain variant drops the ⟨φ⟩ coupling). The evolving
//!              state is split into a zero-mean field plus the scalar mean,
//!              which obeys d⟨φ⟩/dt = −⟨φ⟩ − ½⟨|∇φ|²⟩ (adopted) or
//!              d⟨φ⟩/dt = −½⟨|∇φ|²⟩ (plain).
//! Cole–Hopf:   ψ = e^{−φ/2} turns the adopted form into
//!              ψ_t = Δψ + ψT[log ψ] − ψ⟨log ψ⟩ − ½ψG,
//!              with the nonlocal mean term dropped for the plain variant.
//!              The normalized mean ⟨log ψ⟩ (not the bare box integral) is
//!              forced by the chain rule ψ_t = −½ψ·φ_t.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::GridSpec;
use crate::multiplier::MultiplierSymbol;
use crate::vector::VectorField;

/// Positivity margin below which the Cole–Hopf state has left the
/// transform's domain.
pub const EPS_POS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    Primal,
    IntegratedAdopted,
    IntegratedPlain,
    /// Transformed adopted form (keeps the nonlocal −ψ⟨log ψ⟩ term).
    Colehopf,
    /// Transformed plain form (nonlocal term dropped).
    ColehopfPlain,
}

impl Form {
    pub fn is_colehopf(&self) -> bool {
        matches!(self, Form::Colehopf | Form::ColehopfPlain)
    }
    pub fn is_integrated(&self) -> bool {
        matches!(self, Form::IntegratedAdopted | Form::IntegratedPlain)
    }
}

/// Scalar evolving state: zero-mean spectral field plus its mean,
/// tracked as a separate scalar ODE state. Used for both φ and ψ.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarState {
    pub field: SpectralField,
    pub mean: f64,
}

impl ScalarState {
    /// Split a full field into zero-mean part + mean.
    pub fn from_full(f: &SpectralField) -> Self {
        ScalarState { mean: f.mean(), field: f.subtract_mean() }
    }

    /// Reassemble the full field (c(0) = mean).
    pub fn full_field(&self) -> SpectralField {
        let mut f = self.field.clone();
        f.coeffs[0] = num_complex::Complex64::new(self.mean, 0.0);
        f.zero_mean = self.mean == 0.0;
        f
    }

    /// Grid samples of the full field.
    pub fn full_samples(&self) -> Vec<f64> {
        let mut s = self.field.to_physical();
        for v in s.iter_mut() {
            *v += self.mean;
        }
        s
    }
}

/// Evolving state for any of the forms.
#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Primal(VectorField),
    Scalar(ScalarState),
}

impl State {
    pub fn as_primal(&self) -> Result<&VectorField> {
        match self {
            State::Primal(u) => Ok(u),
            _ => Err(Error::InvalidSpec("expected a primal (vector) state".into())),
        }
    }
    pub fn as_scalar(&self) -> Result<&ScalarState> {
        match self {
            State::Scalar(s) => Ok(s),
            _ => Err(Error::InvalidSpec("expected a scalar state".into())),
        }
    }
}

/// Model description: which form, which symbol, what forcing, which grid.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub form: Form,
    pub symbol: MultiplierSymbol,
    /// Zero-mean forcing potential; the primal forcing is ∇G. None = 0.
    pub g: Option<SpectralField>,
    pub grid: GridSpec,
}

impl ModelSpec {
    pub fn new(
        form: Form,
        symbol: MultiplierSymbol,
        g: Option<SpectralField>,
        grid: GridSpec,
    ) -> Result<Self> {
        symbol.validate()?;
        if form.is_colehopf() && !symbol.is_bounded() {
            return Err(Error::InvalidSpec(
                "the Cole-Hopf form requires a bounded symbol; kse is excluded".into(),
            ));
        }
        if let Some(gf) = &g {
            if !gf.grid.same_geometry(&grid) {
                return Err(Error::GridMismatch("forcing potential on a different grid".into()));
            }
            if gf.mean().abs() > 1e-14 {
                return Err(Error::InvalidSpec("forcing potential G must be zero-mean".into()));
            }
        }
        Ok(ModelSpec { form, symbol, g, grid })
    }

    /// Diagonal linear rate of field mode `idx`:
    /// −κ² + m(k) for primal/integrated forms, −κ² for Cole–Hopf
    /// (there T acts inside the nonlinearity).
    pub fn linear_symbol(&self, idx: usize) -> f64 {
        let lap = -self.grid.kappa_sq(idx);
        if self.form.is_colehopf() {
            lap
        } else {
            let k = self.grid.index_modes(idx);
            lap + self.symbol.m(&k, &self.grid).unwrap_or(0.0)
        }
    }

    /// Linear rate of the tracked mean scalar.
    pub fn linear_mean_rate(&self) -> f64 {
        match self.form {
            Form::IntegratedAdopted => -1.0,
            _ => 0.0,
        }
    }
}

fn ensure_finite(samples: &[f64], what: &str) -> Result<()> {
    if samples.iter().any(|v| !v.is_finite()) {
        Err(Error::NonFinite(what.to_string()))
    } else {
        Ok(())
    }
}

/// Nonlinear (non-diagonal) part of the primal RHS:
/// −(U·∇)U + ∇G, dealiased, gradient-projected in 2D, zero-mean.
pub fn nonlinear_primal(u: &VectorField, spec: &ModelSpec) -> Result<VectorField> {
    let d = u.d();
    let phys: Vec<Vec<f64>> = u.components.iter().map(|c| c.to_physical()).collect();
    for p in &phys {
        ensure_finite(p, "primal state samples")?;
    }
    let mut out_components = Vec::with_capacity(d);
    for i in 0..d {
        let mut adv = vec![0.0; phys[0].len()];
        for (j, uj) in phys.iter().enumerate() {
            let dui = u.components[i].differentiate(j + 1, 1).to_physical();
            for (a, (x, y)) in adv.iter_mut().zip(uj.iter().zip(&dui)) {
                *a += x * y;
            }
        }
        let mut term = SpectralField::from_samples(u.components[i].grid, &adv)?
            .dealias()
            .scale(-1.0);
        if let Some(g) = &spec.g {
            term = term.add(&g.differentiate(i + 1, 1));
        }
        term.coeffs[0] = num_complex::Complex64::ZERO;
        term.zero_mean = true;
        out_components.push(term);
    }
    let out = VectorField { components: out_components };
    Ok(if d == 2 { out.gradient_project() } else { out })
}

/// Full primal RHS: ΔU + TU + nonlinear part.
pub fn rhs_primal(u: &VectorField, spec: &ModelSpec) -> Result<VectorField> {
    if spec.form != Form::Primal {
        return Err(Error::InvalidSpec("rhs_primal called with a non-primal spec".into()));
    }
    let nl = nonlinear_primal(u, spec)?;
    let components = u
        .components
        .iter()
        .zip(nl.components)
        .map(|(c, n)| {
            let mut lin = c.clone();
            for (idx, v) in lin.coeffs.iter_mut().enumerate() {
                *v *= spec.linear_symbol(idx);
            }
            lin.add(&n)
        })
        .collect();
    Ok(VectorField { components })
}

/// |∇φ|² as a dealiased spectral field (its c(0) is the quadrature mean).
pub fn grad_sq(phi: &SpectralField) -> Result<SpectralField> {
    let d = phi.grid.d;
    let mut samples = vec![0.0; phi.grid.len()];
    for axis in 1..=d {
        let dphi = phi.differentiate(axis, 1).to_physical();
        ensure_finite(&dphi, "gradient samples")?;
        for (s, v) in samples.iter_mut().zip(&dphi) {
            *s += v * v;
        }
    }
    Ok(SpectralField::from_samples(phi.grid, &samples)?.dealias())
}

/// Nonlinear parts of the integrated form: the zero-mean field part
/// −½(|∇φ|² − ⟨|∇φ|²⟩) + G and the mean part −½⟨|∇φ|²⟩.
pub fn nonlinear_integrated(
    phi: &ScalarState,
    spec: &ModelSpec,
) -> Result<(SpectralField, f64)> {
    let gsq = grad_sq(&phi.field)?;
    let mean_gsq = gsq.mean();
    let mut field = gsq.subtract_mean().scale(-0.5);
    if let Some(g) = &spec.g {
        field = field.add(g);
    }
    field.coeffs[0] = num_complex::Complex64::ZERO;
    field.zero_mean = true;
    Ok((field, -0.5 * mean_gsq))
}

/// Full integrated RHS: (dφ̃, dm̄) with
/// dφ̃ = Δφ̃ + Tφ̃ + nonlinear field part,
/// dm̄ = −m̄ − ½⟨|∇φ|²⟩ (adopted) or −½⟨|∇φ|²⟩ (plain).
pub fn rhs_integrated(phi: &ScalarState, spec: &ModelSpec) -> Result<ScalarState> {
    if !spec.form.is_integrated() {
        return Err(Error::InvalidSpec(
            "rhs_integrated called with a non-integrated spec".into(),
        ));
    }
    let (nl_field, nl_mean) = nonlinear_integrated(phi, spec)?;
    let mut dfield = phi.field.clone();
    for (idx, v) in dfield.coeffs.iter_mut().enumerate() {
        *v *= spec.linear_symbol(idx);
    }
    let dfield = dfield.add(&nl_field);
    let dmean = spec.linear_mean_rate() * phi.mean + nl_mean;
    Ok(ScalarState { field: dfield, mean: dmean })
}

/// Nonlinear part of the Cole–Hopf form, split into zero-mean field and
/// mean components: N(ψ) = ψT[log ψ] − ψ⟨log ψ⟩ − ½ψG (adopted), with the
/// nonlocal term dropped for the plain variant. The full RHS is Δψ + N(ψ).
pub fn nonlinear_colehopf(
    psi: &ScalarState,
    spec: &ModelSpec,
) -> Result<(SpectralField, f64)> {
    let grid = psi.field.grid;
    let samples = psi.full_samples();
    ensure_finite(&samples, "psi samples")?;
    let min = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < EPS_POS {
        return Err(Error::PositivityLost { min, eps: EPS_POS });
    }
    let log_samples: Vec<f64> = samples.iter().map(|v| v.ln()).collect();
    let log_hat = SpectralField::from_samples(grid, &log_samples)?;
    let t_log = log_hat.apply_multiplier(&spec.symbol)?.to_physical();
    let prod: Vec<f64> = samples.iter().zip(&t_log).map(|(a, b)| a * b).collect();
    let mut n_full = SpectralField::from_samples(grid, &prod)?.dealias();
    if spec.form == Form::Colehopf {
        let mean_log = log_hat.mean();
        n_full = n_full.add(&psi.full_field().scale(-mean_log));
    }
    if let Some(g) = &spec.g {
        let g_phys = g.to_physical();
        let fg: Vec<f64> = samples.iter().zip(&g_phys).map(|(a, b)| a * b).collect();
        n_full = n_full.add(&SpectralField::from_samples(grid, &fg)?.dealias().scale(-0.5));
    }
    let mean = n_full.mean();
    Ok((n_full.subtract_mean(), mean))
}

/// Full Cole–Hopf RHS: (dψ̃, dm̄) = (Δψ̃ + Ñ(ψ), ⟨N(ψ)⟩).
pub fn rhs_colehopf(psi: &ScalarState, spec: &ModelSpec) -> Result<ScalarState> {
    if !spec.form.is_colehopf() {
        return Err(Error::InvalidSpec(
            "rhs_colehopf called with a non-colehopf spec".into(),
        ));
    }
    let (nl_field, nl_mean) = nonlinear_colehopf(psi, spec)?;
    Ok(ScalarState { field: psi.field.laplacian().add(&nl_field), mean: nl_mean })
}

/// Full RHS dispatch on the state/form pair.
pub fn rhs(state: &State, spec: &ModelSpec) -> Result<State> {
    match (state, spec.form) {
        (State::Primal(u), Form::Primal) => Ok(State::Primal(rhs_primal(u, spec)?)),
        (State::Scalar(s), f) if f.is_integrated() => {
            Ok(State::Scalar(rhs_integrated(s, spec)?))
        }
        (State::Scalar(s), f) if f.is_colehopf() => Ok(State::Scalar(rhs_colehopf(s, spec)?)),
        _ => Err(Error::InvalidSpec("state shape does not match the spec form".into())),
    }
}

/// Exact linear growth rate of mode `k` about U = 0: ω = −κ² + m(k).
pub fn linear_dispersion(symbol: &MultiplierSymbol, k: &[i64], grid: &GridSpec) -> Result<f64> {
    let k0 = grid.k0();
    let ksq: i64 = k.iter().map(|&ki| ki * ki).sum();
    Ok(-k0 * k0 * ksq as f64 + symbol.m(k, grid)?)
}
