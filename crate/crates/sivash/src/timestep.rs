//! Time integration with exact treatment of the diagonal linear part.
//!
//! Both schemes act on a flat complex state vector whose linear dynamics is
//! diagonal (the Fourier symbol of the model plus, for scalar forms, one
//! slot for the tracked mean):
//!
//! * `ifrk4` — classical RK4 on the integrating-factor variable
//!   e^{−tΛ}u; exact to round-off when the nonlinearity vanishes, no
//!   stiffness restriction from Λ.
//! * `imex_cnab2` — Crank–Nicolson on the linear part, second-order
//!   Adams–Bashforth on the nonlinear part (first step bootstrapped with
//!   the nonlinearity frozen).
//!
//! A blow-up guard realizes the maximal-interval semantics: when the
//! monitored norm (‖∇U‖ for the primal form, full H¹ of ψ for Cole–Hopf)
//! exceeds the threshold or turns non-finite, integration stops with
//! [`Error::BlowUp`] carrying the failure time.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{self, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::models::{
    nonlinear_colehopf, nonlinear_integrated, nonlinear_primal, Form, ModelSpec, ScalarState,
    State,
};
use crate::vector::VectorField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Ifrk4,
    ImexCnab2,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    /// Snapshot cadence in steps (0 = initial/final only).
    pub snapshot_every: usize,
    /// Diagnostics cadence in steps.
    pub diag_every: usize,
    /// Blow-up threshold on the monitored norm.
    pub blowup_threshold: f64,
    /// p used for the α_p diagnostic column.
    pub alpha_p: u32,
}

impl SolverConfig {
    pub fn new(scheme: Scheme, dt: f64, t_end: f64) -> Result<Self> {
        let cfg = SolverConfig {
            scheme,
            dt,
            t_end,
            snapshot_every: 0,
            diag_every: 1,
            blowup_threshold: 1e8,
            alpha_p: 4,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::InvalidSpec(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0) {
            return Err(Error::InvalidSpec(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        if !(self.blowup_threshold > 0.0) {
            return Err(Error::InvalidSpec("blowup_threshold must be positive".into()));
        }
        if self.alpha_p < 3 {
            return Err(Error::InvalidSpec("alpha_p needs p >= 3".into()));
        }
        Ok(())
    }

    pub fn with_cadence(mut self, snapshot_every: usize, diag_every: usize) -> Self {
        self.snapshot_every = snapshot_every;
        self.diag_every = diag_every.max(1);
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.blowup_threshold = threshold;
        self
    }
}

/// An evolution problem u' = Λu + N(u) on a flat complex state.
pub trait System {
    fn dim(&self) -> usize;
    /// Diagonal linear rates, one per slot.
    fn linear(&self) -> &[f64];
    /// Nonlinear remainder N(u).
    fn nonlinear(&self, t: f64, u: &[Complex64]) -> Result<Vec<Complex64>>;
    /// Monitored blow-up norm of the state.
    fn monitor(&self, u: &[Complex64]) -> (&'static str, f64);
}

// ---------------------------------------------------------------- packing

pub fn pack_scalar(s: &ScalarState) -> Vec<Complex64> {
    let mut data = s.field.coeffs.clone();
    data.push(Complex64::new(s.mean, 0.0));
    data
}

pub fn unpack_scalar(grid: GridSpec, data: &[Complex64]) -> ScalarState {
    let n = grid.len();
    let mut field = crate::field::SpectralField {
        grid,
        coeffs: data[..n].to_vec(),
        zero_mean: true,
    };
    field.coeffs[0] = Complex64::ZERO;
    ScalarState { field, mean: data[n].re }
}

pub fn pack_vector(u: &VectorField) -> Vec<Complex64> {
    let mut data = Vec::with_capacity(u.d() * u.grid().len());
    for c in &u.components {
        data.extend_from_slice(&c.coeffs);
    }
    data
}

pub fn unpack_vector(grid: GridSpec, data: &[Complex64]) -> VectorField {
    let n = grid.len();
    let components = (0..grid.d)
        .map(|i| {
            let mut f = crate::field::SpectralField {
                grid,
                coeffs: data[i * n..(i + 1) * n].to_vec(),
                zero_mean: true,
            };
            f.coeffs[0] = Complex64::ZERO;
            f
        })
        .collect();
    VectorField { components }
}

/// A [`ModelSpec`] wired up as a steppable [`System`].
pub struct ModelSystem {
    pub spec: ModelSpec,
    linear: Vec<f64>,
}

impl ModelSystem {
    pub fn new(spec: ModelSpec) -> Self {
        let grid = spec.grid;
        let n = grid.len();
        let linear = match spec.form {
            Form::Primal => {
                let mut lam = Vec::with_capacity(grid.d * n);
                for _ in 0..grid.d {
                    lam.extend((0..n).map(|idx| spec.linear_symbol(idx)));
                }
                lam
            }
            _ => {
                let mut lam: Vec<f64> = (0..n).map(|idx| spec.linear_symbol(idx)).collect();
                lam.push(spec.linear_mean_rate());
                lam
            }
        };
        ModelSystem { spec, linear }
    }

    pub fn pack(&self, state: &State) -> Result<Vec<Complex64>> {
        match (state, self.spec.form) {
            (State::Primal(u), Form::Primal) => Ok(pack_vector(u)),
            (State::Scalar(s), f) if f != Form::Primal => Ok(pack_scalar(s)),
            _ => Err(Error::InvalidSpec("state shape does not match the spec form".into())),
        }
    }

    pub fn unpack(&self, data: &[Complex64]) -> State {
        match self.spec.form {
            Form::Primal => State::Primal(unpack_vector(self.spec.grid, data)),
            _ => State::Scalar(unpack_scalar(self.spec.grid, data)),
        }
    }
}

impl System for ModelSystem {
    fn dim(&self) -> usize {
        self.linear.len()
    }

    fn linear(&self) -> &[f64] {
        &self.linear
    }

    fn nonlinear(&self, _t: f64, u: &[Complex64]) -> Result<Vec<Complex64>> {
        match self.spec.form {
            Form::Primal => {
                let state = unpack_vector(self.spec.grid, u);
                Ok(pack_vector(&nonlinear_primal(&state, &self.spec)?))
            }
            f => {
                let state = unpack_scalar(self.spec.grid, u);
                let (field, mean) = if f.is_integrated() {
                    nonlinear_integrated(&state, &self.spec)?
                } else {
                    nonlinear_colehopf(&state, &self.spec)?
                };
                let mut data = field.coeffs;
                data.push(Complex64::new(mean, 0.0));
                Ok(data)
            }
        }
    }

    fn monitor(&self, u: &[Complex64]) -> (&'static str, f64) {
        let grid = self.spec.grid;
        let n = grid.len();
        let vol = grid.volume();
        match self.spec.form {
            Form::Primal => {
                // ‖∇U‖_{L²}² = L^d Σ_i Σ_k κ²|c_i(k)|²
                let mut acc = 0.0;
                for i in 0..grid.d {
                    for idx in 0..n {
                        acc += grid.kappa_sq(idx) * u[i * n + idx].norm_sqr();
                    }
                }
                ("grad_u_l2", (vol * acc).sqrt())
            }
            f if f.is_colehopf() => {
                // full H¹ of ψ including the mean slot
                let mut acc = u[n].norm_sqr();
                for idx in 0..n {
                    acc += (1.0 + grid.kappa_sq(idx)) * u[idx].norm_sqr();
                }
                ("psi_h1", (vol * acc).sqrt())
            }
            _ => {
                // ‖∇φ‖_{L²} = ‖U‖_{L²}
                let mut acc = 0.0;
                for idx in 0..n {
                    acc += grid.kappa_sq(idx) * u[idx].norm_sqr();
                }
                ("grad_phi_l2", (vol * acc).sqrt())
            }
        }
    }
}

// ------------------------------------------------------------- integrator

/// One-step integrator over a [`System`]; owns the exponential tables and
/// the previous nonlinearity needed by the multistep scheme.
pub struct Integrator<'a, S: System> {
    sys: &'a S,
    scheme: Scheme,
    dt: f64,
    e_half: Vec<f64>,
    e_full: Vec<f64>,
    cn_num: Vec<f64>,
    cn_den: Vec<f64>,
    prev_n: Option<Vec<Complex64>>,
}

impl<'a, S: System> Integrator<'a, S> {
    pub fn new(sys: &'a S, scheme: Scheme, dt: f64) -> Self {
        let lam = sys.linear();
        let e_half: Vec<f64> = lam.iter().map(|&l| (l * dt / 2.0).exp()).collect();
        let e_full: Vec<f64> = lam.iter().map(|&l| (l * dt).exp()).collect();
        let cn_num: Vec<f64> = lam.iter().map(|&l| 1.0 + 0.5 * dt * l).collect();
        let cn_den: Vec<f64> = lam.iter().map(|&l| 1.0 - 0.5 * dt * l).collect();
        Integrator { sys, scheme, dt, e_half, e_full, cn_num, cn_den, prev_n: None }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advance `u` by one step from time `t`.
    pub fn step(&mut self, t: f64, u: &mut Vec<Complex64>) -> Result<()> {
        match self.scheme {
            Scheme::Ifrk4 => self.step_ifrk4(t, u),
            Scheme::ImexCnab2 => self.step_cnab2(t, u),
        }
    }

    fn step_ifrk4(&mut self, t: f64, u: &mut Vec<Complex64>) -> Result<()> {
        let dt = self.dt;
        let n1 = self.sys.nonlinear(t, u)?;
        let u2: Vec<Complex64> = u
            .iter()
            .zip(&n1)
            .zip(&self.e_half)
            .map(|((&ui, &n), &e)| e * (ui + 0.5 * dt * n))
            .collect();
        let n2 = self.sys.nonlinear(t + 0.5 * dt, &u2)?;
        let u3: Vec<Complex64> = u
            .iter()
            .zip(&n2)
            .zip(&self.e_half)
            .map(|((&ui, &n), &e)| e * ui + 0.5 * dt * n)
            .collect();
        let n3 = self.sys.nonlinear(t + 0.5 * dt, &u3)?;
        let u4: Vec<Complex64> = (0..u.len())
            .map(|i| self.e_full[i] * u[i] + dt * self.e_half[i] * n3[i])
            .collect();
        let n4 = self.sys.nonlinear(t + dt, &u4)?;
        for i in 0..u.len() {
            u[i] = self.e_full[i] * u[i]
                + dt / 6.0
                    * (self.e_full[i] * n1[i]
                        + 2.0 * self.e_half[i] * (n2[i] + n3[i])
                        + n4[i]);
        }
        Ok(())
    }

    fn step_cnab2(&mut self, t: f64, u: &mut Vec<Complex64>) -> Result<()> {
        let dt = self.dt;
        let n_now = self.sys.nonlinear(t, u)?;
        let n_prev = self.prev_n.take().unwrap_or_else(|| n_now.clone());
        for i in 0..u.len() {
            let nl = 1.5 * n_now[i] - 0.5 * n_prev[i];
            u[i] = (self.cn_num[i] * u[i] + dt * nl) / self.cn_den[i];
        }
        self.prev_n = Some(n_now);
        Ok(())
    }
}

/// One step of the configured scheme (multistep schemes bootstrap with the
/// nonlinearity frozen, as within [`integrate`]).
pub fn step(state: &State, spec: &ModelSpec, cfg: &SolverConfig) -> Result<State> {
    cfg.validate()?;
    let sys = ModelSystem::new(spec.clone());
    let mut u = sys.pack(state)?;
    let mut integ = Integrator::new(&sys, cfg.scheme, cfg.dt);
    integ.step(0.0, &mut u)?;
    let (name, value) = sys.monitor(&u);
    if !value.is_finite() || value > cfg.blowup_threshold {
        return Err(Error::BlowUp { t: cfg.dt, norm_name: name, value });
    }
    Ok(sys.unpack(&u))
}

// ------------------------------------------------------------- trajectory

/// Recorded run: diagnostics at `diag_every` cadence, state snapshots at
/// `snapshot_every` cadence (initial and final always included).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<(f64, State)>,
    /// Steps on which the advective CFL heuristic dt ≤ 0.5·Δx/max|U| was
    /// violated (warning only; the integrating factor removes the stiff
    /// linear restriction).
    pub cfl_violations: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> &State {
        &self.snapshots.last().expect("trajectory always has a final snapshot").1
    }
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }
}

/// Observer hooks fed during [`integrate`].
pub trait TrajectorySink {
    fn on_record(&mut self, _rec: &DiagnosticsRecord) -> Result<()> {
        Ok(())
    }
    fn on_snapshot(&mut self, _t: f64, _state: &State) -> Result<()> {
        Ok(())
    }
}

/// Sink that ignores everything.
pub struct NullSink;
impl TrajectorySink for NullSink {}

/// Integrate from `state0` to `t_end`, pushing snapshots and diagnostics
/// records to `sink` and collecting them in the returned [`Trajectory`].
/// Deterministic given (state0, spec, cfg).
pub fn integrate(
    state0: &State,
    spec: &ModelSpec,
    cfg: &SolverConfig,
    sink: &mut dyn TrajectorySink,
) -> Result<Trajectory> {
    cfg.validate()?;
    let sys = ModelSystem::new(spec.clone());
    let mut u = sys.pack(state0)?;
    let mut traj = Trajectory { records: Vec::new(), snapshots: Vec::new(), cfl_violations: 0 };

    let record = |traj: &mut Trajectory,
                  sink: &mut dyn TrajectorySink,
                  t: f64,
                  state: &State|
     -> Result<()> {
        let rec = diagnostics::record_for_state(t, state, spec, cfg.alpha_p)?;
        if let Some(max_u) = rec.linf_u_sample {
            if max_u > 0.0 && cfg.dt > 0.5 * spec.grid.dx() / max_u {
                traj.cfl_violations += 1;
            }
        }
        sink.on_record(&rec)?;
        traj.records.push(rec);
        Ok(())
    };

    let state_now = sys.unpack(&u);
    record(&mut traj, sink, 0.0, &state_now)?;
    sink.on_snapshot(0.0, &state_now)?;
    traj.snapshots.push((0.0, state_now));

    let n_steps = (cfg.t_end / cfg.dt + 1e-9).floor() as usize;
    let remainder = cfg.t_end - n_steps as f64 * cfg.dt;
    let mut integ = Integrator::new(&sys, cfg.scheme, cfg.dt);
    let mut t = 0.0;
    for step_idx in 1..=n_steps {
        integ.step(t, &mut u).map_err(|e| at_time(e, t))?;
        t = step_idx as f64 * cfg.dt;
        let (name, value) = sys.monitor(&u);
        if !value.is_finite() || value > cfg.blowup_threshold {
            return Err(Error::BlowUp { t, norm_name: name, value });
        }
        let is_last = step_idx == n_steps && remainder <= 1e-9 * cfg.dt;
        if step_idx % cfg.diag_every == 0 || is_last {
            let state_now = sys.unpack(&u);
            record(&mut traj, sink, t, &state_now)?;
        }
        if (cfg.snapshot_every > 0 && step_idx % cfg.snapshot_every == 0) || is_last {
            let state_now = sys.unpack(&u);
            sink.on_snapshot(t, &state_now)?;
            traj.snapshots.push((t, state_now));
        }
    }
    if remainder > 1e-9 * cfg.dt {
        // final short step, integrating-factor RK4 regardless of scheme
        let mut short = Integrator::new(&sys, Scheme::Ifrk4, remainder);
        short.step(t, &mut u).map_err(|e| at_time(e, t))?;
        t = cfg.t_end;
        let (name, value) = sys.monitor(&u);
        if !value.is_finite() || value > cfg.blowup_threshold {
            return Err(Error::BlowUp { t, norm_name: name, value });
        }
        let state_now = sys.unpack(&u);
        record(&mut traj, sink, t, &state_now)?;
        sink.on_snapshot(t, &state_now)?;
        traj.snapshots.push((t, state_now));
    } else if n_steps == 0 {
        // t_end = 0: the initial state is the final state; nothing to do.
    } else {
        // ensure a final snapshot exists even off the snapshot cadence
        let have_final = traj
            .snapshots
            .last()
            .map(|(ts, _)| (*ts - t).abs() <= 1e-12 * cfg.dt.max(1.0))
            .unwrap_or(false);
        if !have_final {
            let state_now = sys.unpack(&u);
            sink.on_snapshot(t, &state_now)?;
            traj.snapshots.push((t, state_now));
        }
    }
    diagnostics::fill_mean_residuals(&mut traj.records, spec);
    Ok(traj)
}

/// Non-finite samples inside an RHS evaluation are a blow-up in disguise;
/// stamp them with the time of failure.
fn at_time(e: Error, t: f64) -> Error {
    match e {
        Error::NonFinite(_) => Error::BlowUp { t, norm_name: "non-finite", value: f64::NAN },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::NormKind;
    use crate::ic::{mode_field, random_smooth};
    use crate::multiplier::MultiplierSymbol;
    use std::f64::consts::PI;

    fn grid1(n: usize) -> GridSpec {
        GridSpec::square(1, n, 2.0 * PI).unwrap()
    }

    fn bse_spec(grid: GridSpec, form: Form, alpha: f64) -> ModelSpec {
        ModelSpec::new(form, MultiplierSymbol::Bse { alpha }, None, grid).unwrap()
    }

    /// ifrk4 is exact on the linear part: a tiny mode's coefficient evolves
    /// by e^{ω dt} to round-off (the ε² second harmonic is physical).
    #[test]
    fn linear_exactness() {
        let g = grid1(32);
        let spec = bse_spec(g, Form::IntegratedAdopted, 2.0);
        let eps = 1e-10;
        let phi = ScalarState { field: mode_field(g, &[(vec![2], eps, 0.0)]), mean: 0.0 };
        let cfg = SolverConfig::new(Scheme::Ifrk4, 0.1, 0.0).unwrap();
        let stepped = step(&State::Scalar(phi.clone()), &spec, &cfg).unwrap();
        let omega = crate::models::linear_dispersion(&spec.symbol, &[2], &g).unwrap();
        let expect = phi.field.coeff(&[2]).unwrap() * (omega * 0.1).exp();
        let got = stepped.as_scalar().unwrap().field.coeff(&[2]).unwrap();
        let rel = (got - expect).norm() / expect.norm();
        assert!(rel < 1e-12, "relative coefficient error {rel}");
    }

    #[test]
    fn t_end_zero_returns_initial() {
        let g = grid1(32);
        let spec = bse_spec(g, Form::IntegratedAdopted, 2.0);
        let phi = ScalarState { field: random_smooth(g, 3, 0.5, 2.0), mean: 0.2 };
        let cfg = SolverConfig::new(Scheme::Ifrk4, 1e-2, 0.0).unwrap();
        let traj = integrate(&State::Scalar(phi.clone()), &spec, &cfg, &mut NullSink).unwrap();
        assert_eq!(traj.snapshots.len(), 1);
        let final_phi = traj.final_state().as_scalar().unwrap();
        assert_eq!(final_phi.field.coeffs, phi.field.coeffs);
    }

    /// Self-convergence: halving dt cuts the terminal error ~16x for ifrk4
    /// (observed order ≥ 3.5) and ~4x for cnab2 (observed order ≥ 1.8).
    #[test]
    fn dt_refinement_orders() {
        let g = grid1(64);
        let spec = bse_spec(g, Form::IntegratedAdopted, 2.0);
        let phi0 = State::Scalar(ScalarState { field: random_smooth(g, 11, 1.0, 2.0), mean: 0.3 });
        let t_end = 0.5;
        let run = |scheme: Scheme, dt: f64| -> ScalarState {
            let cfg = SolverConfig::new(scheme, dt, t_end).unwrap();
            integrate(&phi0, &spec, &cfg, &mut NullSink)
                .unwrap()
                .final_state()
                .as_scalar()
                .unwrap()
                .clone()
        };
        let err = |a: &ScalarState, b: &ScalarState| -> f64 {
            a.field.sub(&b.field).norm(NormKind::L2).unwrap() + (a.mean - b.mean).abs()
        };
        let reference = run(Scheme::Ifrk4, 1e-4);
        let e1 = err(&run(Scheme::Ifrk4, 4e-3), &reference);
        let e2 = err(&run(Scheme::Ifrk4, 2e-3), &reference);
        let order = (e1 / e2).log2();
        assert!(order >= 3.5, "ifrk4 observed order {order} (e1={e1:.3e}, e2={e2:.3e})");
        let c1 = err(&run(Scheme::ImexCnab2, 4e-3), &reference);
        let c2 = err(&run(Scheme::ImexCnab2, 2e-3), &reference);
        let order_cn = (c1 / c2).log2();
        assert!(order_cn >= 1.8, "cnab2 observed order {order_cn}");
        // cross-scheme agreement on the same run
        let a = run(Scheme::Ifrk4, 2e-4);
        let b = run(Scheme::ImexCnab2, 2e-4);
        assert!(err(&a, &b) < 1e-6, "cross-scheme deviation {}", err(&a, &b));
    }

    /// A strongly unstable symbol drives the norm past the threshold:
    /// the guard reports BlowUp with the crossing time.
    #[test]
    fn blowup_guard() {
        let g = grid1(32);
        let spec = ModelSpec::new(
            Form::IntegratedAdopted,
            MultiplierSymbol::Qse { alpha: 60.0 },
            None,
            g,
        )
        .unwrap();
        let phi = State::Scalar(ScalarState { field: mode_field(g, &[(vec![1], 1.0, 0.0)]), mean: 0.0 });
        let cfg = SolverConfig::new(Scheme::Ifrk4, 1e-2, 10.0).unwrap().with_threshold(1e6);
        match integrate(&phi, &spec, &cfg, &mut NullSink) {
            Err(Error::BlowUp { t, .. }) => assert!(t > 0.0 && t < 1.0, "t = {t}"),
            other => panic!("expected BlowUp, got {other:?}"),
        }
    }

    /// KSE 1D, L = 16π, α = 1, small random start: bounded through t = 100.
    /// The quartic symbol is stiff (max κ⁴ ≈ 7e2 at n = 128) and is handled
    /// exactly by the integrating factor.
    #[test]
    fn kse_smoke() {
        let g = GridSpec::square(1, 128, 16.0 * PI).unwrap();
        let spec = ModelSpec::new(
            Form::Primal,
            MultiplierSymbol::Kse { alpha: 1.0 },
            None,
            g,
        )
        .unwrap();
        let phi0 = random_smooth(g, 7, 0.1, 2.0);
        let u0 = State::Primal(VectorField::gradient_of(&phi0));
        let cfg = SolverConfig::new(Scheme::Ifrk4, 0.05, 100.0)
            .unwrap()
            .with_cadence(0, 100);
        let traj = integrate(&u0, &spec, &cfg, &mut NullSink).unwrap();
        for rec in &traj.records {
            assert!(rec.l2_u.is_finite() && rec.l2_u < 1e3);
        }
    }

    /// Forced diffusive Burgers converges to a steady state:
    /// ‖∂_t U‖_{L²} < 1e−8 by t = 200.
    #[test]
    fn forced_burgers_steady_state() {
        let g = grid1(64);
        let forcing = mode_field(g, &[(vec![1], 0.5, 0.0)]);
        let spec =
            ModelSpec::new(Form::Primal, MultiplierSymbol::Zero, Some(forcing), g).unwrap();
        let phi0 = random_smooth(g, 2, 0.5, 2.0);
        let u0 = State::Primal(VectorField::gradient_of(&phi0));
        // dt sets the fixed-point defect of the scheme (O(dt^4)); 0.01 puts
        // it safely under the 1e-8 residual target
        let cfg = SolverConfig::new(Scheme::Ifrk4, 0.01, 200.0)
            .unwrap()
            .with_cadence(0, 1000);
        let traj = integrate(&u0, &spec, &cfg, &mut NullSink).unwrap();
        let u_final = traj.final_state().as_primal().unwrap().clone();
        let dudt = crate::models::rhs_primal(&u_final, &spec).unwrap();
        let res = dudt.norm(NormKind::L2).unwrap();
        assert!(res < 1e-8, "steady-state residual {res:.3e}");
    }

    /// Bit-identical trajectories for identical inputs.
    #[test]
    fn determinism() {
        let g = grid1(32);
        let spec = bse_spec(g, Form::IntegratedAdopted, 2.0);
        let phi0 = State::Scalar(ScalarState { field: random_smooth(g, 5, 0.7, 2.0), mean: 0.1 });
        let cfg = SolverConfig::new(Scheme::Ifrk4, 1e-2, 1.0).unwrap();
        let a = integrate(&phi0, &spec, &cfg, &mut NullSink).unwrap();
        let b = integrate(&phi0, &spec, &cfg, &mut NullSink).unwrap();
        let fa = a.final_state().as_scalar().unwrap();
        let fb = b.final_state().as_scalar().unwrap();
        assert_eq!(fa.field.coeffs, fb.field.coeffs);
        assert_eq!(fa.mean.to_bits(), fb.mean.to_bits());
    }

    /// Zero-mean slots stay exactly zero along trajectories of every form.
    #[test]
    fn zero_mean_preserved_exactly() {
        let g = grid1(32);
        for form in [Form::Primal, Form::IntegratedAdopted, Form::IntegratedPlain, Form::Colehopf]
        {
            let spec = bse_spec(g, form, 2.0);
            let phi0 = random_smooth(g, 9, 0.4, 2.0);
            let state0 = match form {
                Form::Primal => State::Primal(VectorField::gradient_of(&phi0)),
                f if f.is_colehopf() => {
                    State::Scalar(crate::colehopf::psi_from_phi(&ScalarState {
                        field: phi0,
                        mean: 0.0,
                    }))
                }
                _ => State::Scalar(ScalarState { field: phi0, mean: 0.0 }),
            };
            let cfg = SolverConfig::new(Scheme::Ifrk4, 1e-2, 0.5).unwrap();
            let traj = integrate(&state0, &spec, &cfg, &mut NullSink).unwrap();
            match traj.final_state() {
                State::Primal(u) => {
                    for c in &u.components {
                        assert_eq!(c.coeffs[0], Complex64::ZERO);
                    }
                }
                State::Scalar(s) => assert_eq!(s.field.coeffs[0], Complex64::ZERO),
            }
        }
    }
}
