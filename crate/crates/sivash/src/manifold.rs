//! Numerical inertial manifolds for the prepared Cole–Hopf equation
//! ψ' + Aψ = N_P(ψ), A = −Δ.
//!
//! The cut P_n/Q_n comes from the distinct-eigenvalue table: P_n spans all
//! modes with Λ(|k|²) ≤ λ_n (the constant mode — ψ's mean — included,
//! since ψ is not zero-mean and the mean dynamics must live in the
//! inertial form). Two constructions of the graph Φ : P_nH → Q_nH are
//! provided:
//!
//! * `aim_fixed_point` — iterate q ← A⁻¹Q_n N_P(p + q) from q = 0;
//!   a contraction when the gap clears the nonlinearity's Lipschitz bound.
//! * `lyapunov_perron` — path iteration for the truncated backward
//!   integral q = ∫_{−T}^0 e^{As} Q_n N_P(u(s)) ds along the backward
//!   solution of the p-equation closed with the current graph iterate.
//!
//! On top sit the inertial form, graph distance, exponential-attraction
//! fits, the strong-squeezing test, and the lift back to U = ∇φ space.

use num_complex::Complex64;
use serde::Serialize;

use crate::colehopf::PreparedNonlinearity;
use crate::diagnostics::{fit_line, LineFit};
use crate::error::{Error, Result};
use crate::field::{NormKind, SpectralField};
use crate::grid::GridSpec;
use crate::models::ScalarState;
use crate::spectrum::SpectrumTable;
use crate::timestep::{pack_scalar, unpack_scalar, Integrator, Scheme, System};
use crate::vector::VectorField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphMethod {
    AimFixedPoint,
    LyapunovPerron,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projector {
    P,
    Q,
}

/// Spectral cut: mode mask for P_n (Λ ≤ λ_n), complementary Q_n.
#[derive(Debug, Clone)]
pub struct ProjectionPair {
    pub n: usize,
    pub lambda_n: f64,
    pub lambda_n1: f64,
    pub grid: GridSpec,
    /// Integer |k|² threshold of the cut.
    ksq_n: i64,
    pub dim_p: usize,
}

impl ProjectionPair {
    pub fn new(grid: GridSpec, table: &SpectrumTable, n: usize) -> Result<Self> {
        if n + 1 >= table.entries.len() {
            return Err(Error::InvalidSpec(format!(
                "cut index {n} has no successor in the spectrum table"
            )));
        }
        let ksq_n = table.entries[n].ksq;
        let mut dim_p = 1; // constant mode
        for idx in 1..grid.len() {
            if grid.mode_norm_sq(idx) <= ksq_n {
                dim_p += 1;
            }
        }
        Ok(ProjectionPair {
            n,
            lambda_n: table.entries[n].lambda,
            lambda_n1: table.entries[n + 1].lambda,
            grid,
            ksq_n,
            dim_p,
        })
    }

    fn in_p(&self, idx: usize) -> bool {
        self.grid.mode_norm_sq(idx) <= self.ksq_n
    }

    /// Coefficient masking. P keeps the mean slot, Q zeroes it.
    pub fn project(&self, u: &ScalarState, which: Projector) -> ScalarState {
        let mut field = u.field.clone();
        for idx in 0..field.coeffs.len() {
            let keep = match which {
                Projector::P => self.in_p(idx),
                Projector::Q => !self.in_p(idx),
            };
            if !keep {
                field.coeffs[idx] = Complex64::ZERO;
            }
        }
        field.coeffs[0] = Complex64::ZERO;
        field.zero_mean = true;
        let mean = match which {
            Projector::P => u.mean,
            Projector::Q => 0.0,
        };
        ScalarState { field, mean }
    }

    /// A⁻¹ restricted to Q_n: divide by Λ(k) = κ², zero the P block.
    pub fn a_inv_q(&self, f: &SpectralField) -> SpectralField {
        let mut out = f.clone();
        for idx in 0..out.coeffs.len() {
            if self.in_p(idx) {
                out.coeffs[idx] = Complex64::ZERO;
            } else {
                out.coeffs[idx] /= self.grid.kappa_sq(idx);
            }
        }
        out.coeffs[0] = Complex64::ZERO;
        out.zero_mean = true;
        out
    }
}

/// Numerical realization of the graph Φ : P_nH → Q_nH.
#[derive(Debug, Clone)]
pub struct ManifoldGraph {
    pub proj: ProjectionPair,
    pub prep: PreparedNonlinearity,
    pub method: GraphMethod,
    /// Iteration budget.
    pub depth: usize,
    /// Backward horizon of the Lyapunov–Perron integral.
    pub t_back: f64,
    /// Fixed-point tolerance in Ḣ¹.
    pub tol: f64,
    /// Lyapunov–Perron path resolution.
    pub lp_steps: usize,
}

impl ManifoldGraph {
    pub fn new(proj: ProjectionPair, prep: PreparedNonlinearity, method: GraphMethod) -> Self {
        // default backward horizon: e^{-10}-size truncation tail at the
        // slowest Q rate, guarded against a closed gap
        let rate = (proj.lambda_n1 - 4.0 * prep.c_est).max(0.5 * proj.lambda_n1);
        ManifoldGraph {
            proj,
            prep,
            method,
            depth: 200,
            t_back: 10.0 / rate,
            tol: 1e-9,
            lp_steps: 160,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_method(mut self, method: GraphMethod) -> Self {
        self.method = method;
        self
    }
}

fn h1(f: &SpectralField) -> f64 {
    f.norm(NormKind::Hs(1.0)).expect("zero-mean field")
}

/// Spectrum table covering the grid's dealiased band.
pub fn band_table(grid: &GridSpec) -> Result<SpectrumTable> {
    let cut = grid.dealias_cutoff();
    crate::spectrum::enumerate(grid.d, grid.l, grid.d as i64 * cut * cut)
}

/// Smallest cut passing the spectral gap condition with C = safety·c_est
/// (α = β = 1, so the condition is gap ≥ 4·safety·c_est). Errors when no
/// gap inside the resolved band is large enough — the gap-vs-Lipschitz
/// diagnostic for this grid.
pub fn auto_cut(table: &SpectrumTable, c_est: f64, safety: f64) -> Result<usize> {
    table
        .check_sgc(safety * c_est, 1.0, 1.0, crate::spectrum::SgcComparator::NonStrict)?
        .ok_or_else(|| {
            Error::NoConvergence {
                residuals: vec![4.0 * safety * c_est],
            }
        })
}

/// Evaluate the graph at `p` (cold start). Returns the Q_n field.
pub fn evaluate_graph(p: &ScalarState, graph: &ManifoldGraph) -> Result<SpectralField> {
    evaluate_graph_warm(p, graph, None).map(|(q, _)| q)
}

/// Evaluate with an optional warm start; returns the residual history.
pub fn evaluate_graph_warm(
    p: &ScalarState,
    graph: &ManifoldGraph,
    warm: Option<&SpectralField>,
) -> Result<(SpectralField, Vec<f64>)> {
    match graph.method {
        GraphMethod::AimFixedPoint => aim_fixed_point(p, graph, warm),
        GraphMethod::LyapunovPerron => lyapunov_perron(p, graph),
    }
}

fn aim_fixed_point(
    p: &ScalarState,
    graph: &ManifoldGraph,
    warm: Option<&SpectralField>,
) -> Result<(SpectralField, Vec<f64>)> {
    let mut q = warm
        .cloned()
        .unwrap_or_else(|| SpectralField::zeros(graph.proj.grid));
    let mut residuals = Vec::new();
    for _ in 0..graph.depth {
        let u = ScalarState { field: p.field.add(&q), mean: p.mean };
        let n_p = graph.prep.n_p(&u)?;
        let q_new = graph.proj.a_inv_q(&n_p);
        let res = h1(&q_new.sub(&q));
        residuals.push(res);
        q = q_new;
        if res <= graph.tol {
            return Ok((q, residuals));
        }
    }
    Err(Error::NoConvergence { residuals })
}

/// Internal (field, mean) pair carrying the non-zero-mean P part of N
/// along the Lyapunov–Perron path.
struct PPart {
    field: SpectralField,
    mean: f64,
}

/// Path iteration for the truncated Lyapunov–Perron integral.
fn lyapunov_perron(
    p: &ScalarState,
    graph: &ManifoldGraph,
) -> Result<(SpectralField, Vec<f64>)> {
    let grid = graph.proj.grid;
    let m = graph.lp_steps;
    let h = graph.t_back / m as f64;
    let nlen = grid.len();
    // per-mode propagators over one path step
    let e_fwd: Vec<f64> = (0..nlen).map(|i| (-grid.kappa_sq(i) * h).exp()).collect();
    let e_bwd: Vec<f64> = (0..nlen).map(|i| (grid.kappa_sq(i) * h).exp()).collect();

    // path index j = 0..=m corresponds to s_j = −T + j·h; j = m is s = 0.
    // start from the linear backward flow of the p-block
    let mut p_path: Vec<ScalarState> = (0..=m)
        .map(|j| {
            let s = (m - j) as f64 * h;
            let mut f = p.field.clone();
            for idx in 0..nlen {
                if graph.proj.in_p(idx) {
                    f.coeffs[idx] *= (grid.kappa_sq(idx) * s).exp();
                } else {
                    f.coeffs[idx] = Complex64::ZERO;
                }
            }
            f.coeffs[0] = Complex64::ZERO;
            ScalarState { field: f, mean: p.mean }
        })
        .collect();
    let mut q_path: Vec<SpectralField> = (0..=m).map(|_| SpectralField::zeros(grid)).collect();
    let mut residuals = Vec::new();
    let mut q_prev_end = SpectralField::zeros(grid);
    for _ in 0..graph.depth {
        // nonlinearity along the path, split into P/Q parts
        let mut n_q: Vec<SpectralField> = Vec::with_capacity(m + 1);
        let mut n_p: Vec<PPart> = Vec::with_capacity(m + 1);
        for j in 0..=m {
            let u = ScalarState {
                field: p_path[j].field.add(&q_path[j]),
                mean: p_path[j].mean,
            };
            let full = graph.prep.n_p(&u)?;
            let split = ScalarState::from_full(&full);
            n_q.push(graph.proj.project(&split, Projector::Q).field);
            n_p.push(PPart {
                field: graph.proj.project(&split, Projector::P).field,
                mean: full.mean(),
            });
        }
        // q(s_{j+1}) = e^{−Ah} q(s_j) + h/2 (e^{−Ah} n_j + n_{j+1}), q(−T) = 0
        let mut q_new: Vec<SpectralField> = Vec::with_capacity(m + 1);
        q_new.push(SpectralField::zeros(grid));
        for j in 0..m {
            let prev = &q_new[j];
            let mut next = prev.clone();
            for idx in 0..nlen {
                if graph.proj.in_p(idx) {
                    next.coeffs[idx] = Complex64::ZERO;
                } else {
                    next.coeffs[idx] = e_fwd[idx] * prev.coeffs[idx]
                        + 0.5 * h * (e_fwd[idx] * n_q[j].coeffs[idx] + n_q[j + 1].coeffs[idx]);
                }
            }
            next.coeffs[0] = Complex64::ZERO;
            q_new.push(next);
        }
        // p(s_{j−1}) = e^{Ah} p(s_j) − h/2 (f_{j−1} + e^{Ah} f_j), p(0) = p
        let mut p_new: Vec<ScalarState> = vec![p.clone(); m + 1];
        for j in (1..=m).rev() {
            let mut field = p_new[j].field.clone();
            for idx in 0..nlen {
                if !graph.proj.in_p(idx) {
                    field.coeffs[idx] = Complex64::ZERO;
                    continue;
                }
                field.coeffs[idx] = e_bwd[idx] * field.coeffs[idx]
                    - 0.5
                        * h
                        * (n_p[j - 1].field.coeffs[idx] + e_bwd[idx] * n_p[j].field.coeffs[idx]);
            }
            field.coeffs[0] = Complex64::ZERO;
            let mean = p_new[j].mean - 0.5 * h * (n_p[j - 1].mean + n_p[j].mean);
            p_new[j - 1] = ScalarState { field, mean };
        }
        let res = h1(&q_new[m].sub(&q_prev_end));
        residuals.push(res);
        q_prev_end = q_new[m].clone();
        q_path = q_new;
        p_path = p_new;
        if res <= graph.tol {
            return Ok((q_path[m].clone(), residuals));
        }
    }
    Err(Error::NoConvergence { residuals })
}

/// Inertial form: dp/dt = −Ap + P_n N_P(p + Φ(p)).
pub fn inertial_form_rhs(p: &ScalarState, graph: &ManifoldGraph) -> Result<ScalarState> {
    let q = evaluate_graph(p, graph)?;
    let u = ScalarState { field: p.field.add(&q), mean: p.mean };
    let n_full = graph.prep.n_p(&u)?;
    let n_p = graph.proj.project(&ScalarState::from_full(&n_full), Projector::P);
    let mut field = p.field.laplacian();
    for idx in 0..field.coeffs.len() {
        if !graph.proj.in_p(idx) {
            field.coeffs[idx] = Complex64::ZERO;
        }
    }
    Ok(ScalarState { field: field.add(&n_p.field), mean: n_full.mean() })
}

/// ‖Q_n u − Φ(P_n u)‖_{Ḣ¹}, the graph-distance surrogate for dist(u, 𝓜).
pub fn graph_distance(u: &ScalarState, graph: &ManifoldGraph) -> Result<f64> {
    let p = graph.proj.project(u, Projector::P);
    let q = graph.proj.project(u, Projector::Q);
    let phi_p = evaluate_graph(&p, graph)?;
    Ok(h1(&q.field.sub(&phi_p)))
}

// ----------------------------------------------------- prepared equation

/// The prepared Cole–Hopf equation as a steppable system.
pub struct PreparedSystem<'a> {
    pub prep: &'a PreparedNonlinearity,
    linear: Vec<f64>,
}

impl<'a> PreparedSystem<'a> {
    pub fn new(prep: &'a PreparedNonlinearity) -> Self {
        let grid = prep.spec.grid;
        let mut linear: Vec<f64> = (0..grid.len()).map(|i| -grid.kappa_sq(i)).collect();
        linear.push(0.0); // mean slot
        PreparedSystem { prep, linear }
    }
}

impl System for PreparedSystem<'_> {
    fn dim(&self) -> usize {
        self.linear.len()
    }
    fn linear(&self) -> &[f64] {
        &self.linear
    }
    fn nonlinear(&self, _t: f64, u: &[Complex64]) -> Result<Vec<Complex64>> {
        let state = unpack_scalar(self.prep.spec.grid, u);
        let (field, mean) = self.prep.n_p_split(&state)?;
        let mut out = field.coeffs;
        out.push(Complex64::new(mean, 0.0));
        Ok(out)
    }
    fn monitor(&self, u: &[Complex64]) -> (&'static str, f64) {
        let grid = self.prep.spec.grid;
        let n = grid.len();
        let mut acc = u[n].norm_sqr();
        for idx in 0..n {
            acc += (1.0 + grid.kappa_sq(idx)) * u[idx].norm_sqr();
        }
        ("psi_h1", (grid.volume() * acc).sqrt())
    }
}

/// Integrate the prepared equation, recording (t, state) every
/// `record_every` steps (initial and final always included).
pub fn integrate_prepared(
    state0: &ScalarState,
    prep: &PreparedNonlinearity,
    dt: f64,
    t_end: f64,
    record_every: usize,
) -> Result<Vec<(f64, ScalarState)>> {
    let sys = PreparedSystem::new(prep);
    let mut u = pack_scalar(state0);
    let mut integ = Integrator::new(&sys, Scheme::Ifrk4, dt);
    let n_steps = (t_end / dt + 0.5).round() as usize;
    let every = record_every.max(1);
    let mut out = vec![(0.0, state0.clone())];
    for step in 1..=n_steps {
        let t = (step - 1) as f64 * dt;
        integ.step(t, &mut u)?;
        let (name, value) = sys.monitor(&u);
        if !value.is_finite() || value > 1e8 {
            return Err(Error::BlowUp { t: step as f64 * dt, norm_name: name, value });
        }
        if step % every == 0 || step == n_steps {
            out.push((step as f64 * dt, unpack_scalar(prep.spec.grid, &u)));
        }
    }
    Ok(out)
}

/// Integrate the inertial form with RK4, warm-starting the graph
/// evaluation along the trajectory; records every `record_every` steps.
pub fn integrate_inertial_form(
    p0: &ScalarState,
    graph: &ManifoldGraph,
    dt: f64,
    t_end: f64,
    record_every: usize,
) -> Result<Vec<(f64, ScalarState)>> {
    let n_steps = (t_end / dt + 0.5).round() as usize;
    let every = record_every.max(1);
    let mut p = p0.clone();
    let mut warm: Option<SpectralField> = None;
    let mut out = vec![(0.0, p.clone())];
    let rhs = |p: &ScalarState, warm: &mut Option<SpectralField>| -> Result<ScalarState> {
        let (q, _) = evaluate_graph_warm(p, graph, warm.as_ref())?;
        let u = ScalarState { field: p.field.add(&q), mean: p.mean };
        let n_full = graph.prep.n_p(&u)?;
        *warm = Some(q);
        let n_p = graph.proj.project(&ScalarState::from_full(&n_full), Projector::P);
        let mut lin = p.field.laplacian();
        for idx in 0..lin.coeffs.len() {
            if !graph.proj.in_p(idx) {
                lin.coeffs[idx] = Complex64::ZERO;
            }
        }
        Ok(ScalarState { field: lin.add(&n_p.field), mean: n_full.mean() })
    };
    for step in 1..=n_steps {
        let k1 = rhs(&p, &mut warm)?;
        let k2 = rhs(&axpy(&p, &k1, dt / 2.0), &mut warm)?;
        let k3 = rhs(&axpy(&p, &k2, dt / 2.0), &mut warm)?;
        let k4 = rhs(&axpy(&p, &k3, dt), &mut warm)?;
        let mut field = p.field.clone();
        for idx in 0..field.coeffs.len() {
            field.coeffs[idx] += dt / 6.0
                * (k1.field.coeffs[idx]
                    + 2.0 * k2.field.coeffs[idx]
                    + 2.0 * k3.field.coeffs[idx]
                    + k4.field.coeffs[idx]);
        }
        let mean = p.mean + dt / 6.0 * (k1.mean + 2.0 * k2.mean + 2.0 * k3.mean + k4.mean);
        p = ScalarState { field, mean };
        if step % every == 0 || step == n_steps {
            out.push((step as f64 * dt, p.clone()));
        }
    }
    Ok(out)
}

// ------------------------------------------------------------- attraction

#[derive(Debug, Clone, Serialize)]
pub struct AttractionFit {
    /// Fitted prefactor C_𝒰 of dist ≤ C_𝒰 e^{−μt}.
    pub c_u: f64,
    /// Fitted decay rate μ.
    pub mu: f64,
    pub r2: f64,
    pub n_points: usize,
    /// Distance floor below which points were excluded from the fit.
    pub floor: f64,
    pub pass: bool,
}

/// Least-squares fit of log graph_distance vs t on the pre-floor segment
/// (burn-in fraction dropped; floor = max(10·tol, 1.5·tail plateau)).
pub fn attraction_fit(
    traj: &[(f64, ScalarState)],
    graph: &ManifoldGraph,
    burn_in_frac: f64,
) -> Result<AttractionFit> {
    if traj.len() < 8 {
        return Err(Error::InvalidSpec("attraction fit needs >= 8 samples".into()));
    }
    let dists: Vec<(f64, f64)> = traj
        .iter()
        .map(|(t, s)| Ok((*t, graph_distance(s, graph)?)))
        .collect::<Result<_>>()?;
    let tail_start = dists.len().saturating_sub((dists.len() / 10).max(2));
    let plateau = dists[tail_start..]
        .iter()
        .map(|(_, d)| *d)
        .fold(f64::INFINITY, f64::min);
    let floor = (10.0 * graph.tol).max(1.5 * plateau);
    let t_span = dists.last().unwrap().0 - dists[0].0;
    let t_min = dists[0].0 + burn_in_frac * t_span;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (t, d) in &dists {
        if *t >= t_min && *d > floor {
            xs.push(*t);
            ys.push(d.ln());
        }
    }
    if xs.len() < 8 {
        return Err(Error::InvalidSpec(format!(
            "attraction fit: only {} usable points above the floor {floor:.3e}",
            xs.len()
        )));
    }
    let LineFit { slope, intercept, r2, n } = fit_line(&xs, &ys)?;
    let mu = -slope;
    Ok(AttractionFit {
        c_u: intercept.exp(),
        mu,
        r2,
        n_points: n,
        floor,
        pass: mu > 0.0 && r2 >= 0.95,
    })
}

// -------------------------------------------------------------- squeezing

#[derive(Debug, Clone, Serialize)]
pub struct SqueezingReport {
    pub started_in_cone: bool,
    /// Cone inequality ‖Qw‖ ≤ ‖Pw‖ held at every recorded time after entry
    /// (for cone-interior starts: from t = 0).
    pub cone_held: bool,
    pub entry_time: Option<f64>,
    /// Fitted exponential decay rate of ‖Qw‖ before cone entry.
    pub q_decay_rate: Option<f64>,
    pub pass: bool,
}

/// Evolve two prepared-equation solutions in lockstep and check the
/// strong-squeezing dichotomy on w = u − v.
pub fn squeezing_test(
    u0: &ScalarState,
    v0: &ScalarState,
    graph: &ManifoldGraph,
    dt: f64,
    t_end: f64,
    record_every: usize,
) -> Result<SqueezingReport> {
    let tu = integrate_prepared(u0, &graph.prep, dt, t_end, record_every)?;
    let tv = integrate_prepared(v0, &graph.prep, dt, t_end, record_every)?;
    let scale0 = h1(&u0.field.sub(&v0.field)).max(1e-30);
    let mut rows: Vec<(f64, f64, f64)> = Vec::new(); // (t, ‖Pw‖, ‖Qw‖)
    for ((t, su), (_, sv)) in tu.iter().zip(&tv) {
        let w = ScalarState { field: su.field.sub(&sv.field), mean: su.mean - sv.mean };
        let pn = h1(&graph.proj.project(&w, Projector::P).field);
        let qn = h1(&graph.proj.project(&w, Projector::Q).field);
        if pn + qn < 1e-13 * scale0 {
            break; // difference at round-off; later rows are noise
        }
        rows.push((*t, pn, qn));
    }
    if rows.is_empty() {
        // identical starts: trivially inside the cone for all time
        return Ok(SqueezingReport {
            started_in_cone: true,
            cone_held: true,
            entry_time: Some(0.0),
            q_decay_rate: None,
            pass: true,
        });
    }
    let in_cone = |pn: f64, qn: f64| qn <= pn * (1.0 + 1e-9) + 1e-13 * scale0;
    let started_in_cone = in_cone(rows[0].1, rows[0].2);
    let entry_idx = rows.iter().position(|(_, pn, qn)| in_cone(*pn, *qn));
    let mut cone_held = true;
    if let Some(i0) = entry_idx {
        for (pn, qn) in rows[i0..].iter().map(|(_, p, q)| (*p, *q)) {
            if !in_cone(pn, qn) {
                cone_held = false;
                break;
            }
        }
    }
    let entry_time = entry_idx.map(|i| rows[i].0);
    let mut q_decay_rate = None;
    if !started_in_cone {
        let stop = entry_idx.unwrap_or(rows.len());
        let xs: Vec<f64> = rows[..stop].iter().map(|(t, _, _)| *t).collect();
        let ys: Vec<f64> = rows[..stop]
            .iter()
            .map(|(_, _, qn)| qn.max(1e-300).ln())
            .collect();
        if xs.len() >= 3 {
            q_decay_rate = Some(-fit_line(&xs, &ys)?.slope);
        }
    }
    let pass = if started_in_cone {
        cone_held
    } else {
        let decay_ok = match q_decay_rate {
            Some(r) => r > 0.0,
            // entry within the first couple of records leaves no room for a
            // fit; the cone took over immediately
            None => entry_idx.is_some_and(|i| i <= 2),
        };
        cone_held && decay_ok
    };
    Ok(SqueezingReport { started_in_cone, cone_held, entry_time, q_decay_rate, pass })
}

// ------------------------------------------------------------------- lift

/// Lift graph points to U-space: ψ = p + Φ(p), U = −2∇ψ/ψ (gradient-
/// projected in 2D, zero-mean). Non-positive lifts are reported (Err side
/// carries min ψ) and skipped by callers.
pub fn lift_to_u(
    graph: &ManifoldGraph,
    p_samples: &[ScalarState],
) -> Result<Vec<std::result::Result<VectorField, f64>>> {
    p_samples
        .iter()
        .map(|p| {
            let q = evaluate_graph(p, graph)?;
            let psi = ScalarState { field: p.field.add(&q), mean: p.mean };
            match crate::colehopf::u_from_psi(&psi) {
                Ok(u) => Ok(Ok(u)),
                Err(Error::PositivityLost { min, .. }) => Ok(Err(min)),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Max-ratio Lipschitz probe of the graph itself:
/// l_est = max ‖Φ(p₁) − Φ(p₂)‖_{Ḣ¹} / ‖p₁ − p₂‖_{Ḣ¹} over seeded in-ball
/// pairs.
pub fn graph_lipschitz_probe(graph: &ManifoldGraph, seed: u64, n_pairs: usize) -> Result<f64> {
    use rand::{Rng, SeedableRng};
    let sample_p = |stream: u64| -> ScalarState {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let norm: f64 = rng.random_range(0.0..graph.prep.inner_radius);
        let slope: f64 = rng.random_range(1.5..3.0);
        let s: u64 = rng.random();
        let field = crate::ic::random_smooth(graph.proj.grid, s, norm.max(1e-9), slope);
        let mean: f64 =
            rng.random_range(graph.prep.radii.r0.min(0.8)..graph.prep.radii.r1.max(1.2));
        graph.proj.project(&ScalarState { field, mean }, Projector::P)
    };
    let ratios = crate::exec::map_indexed(n_pairs, |i| -> Result<Option<f64>> {
        let p1 = sample_p((2 * i) as u64);
        let p2 = sample_p((2 * i + 1) as u64);
        let denom = h1(&p1.field.sub(&p2.field));
        if denom < 1e-12 {
            return Ok(None);
        }
        let q1 = evaluate_graph(&p1, graph)?;
        let q2 = evaluate_graph(&p2, graph)?;
        Ok(Some(h1(&q1.sub(&q2)) / denom))
    });
    let mut l_est: f64 = 0.0;
    for r in ratios {
        if let Some(v) = r? {
            l_est = l_est.max(v);
        }
    }
    Ok(l_est)
}

/// Asymptotic-completeness probe: pull p(t₁) back through the inertial
/// form, lift to v₀ = p(0) + Φ(p(0)), run both forward and fit the decay
/// of ‖u(t) − v(t)‖_{Ḣ¹}. The pullback horizon must be short — backward
/// integration amplifies by e^{λ_n t₁}.
pub fn completeness_probe(
    u_traj: &[(f64, ScalarState)],
    graph: &ManifoldGraph,
    t1: f64,
    dt: f64,
) -> Result<LineFit> {
    let (_, u_at_t1) = u_traj
        .iter()
        .min_by(|a, b| (a.0 - t1).abs().partial_cmp(&(b.0 - t1).abs()).unwrap())
        .ok_or(Error::EmptyEnsemble)?;
    let p1 = graph.proj.project(u_at_t1, Projector::P);
    // backward inertial form: y(s) = p(t1 − s) solves y' = −f(y)
    let n_steps = (t1 / dt + 0.5).round() as usize;
    let mut y = p1;
    for _ in 0..n_steps {
        let k1 = neg_rhs(&y, graph)?;
        let k2 = neg_rhs(&axpy(&y, &k1, dt / 2.0), graph)?;
        let k3 = neg_rhs(&axpy(&y, &k2, dt / 2.0), graph)?;
        let k4 = neg_rhs(&axpy(&y, &k3, dt), graph)?;
        y = ScalarState {
            field: y
                .field
                .add(&k1.field.scale(dt / 6.0))
                .add(&k2.field.scale(dt / 3.0))
                .add(&k3.field.scale(dt / 3.0))
                .add(&k4.field.scale(dt / 6.0)),
            mean: y.mean + dt / 6.0 * (k1.mean + 2.0 * k2.mean + 2.0 * k3.mean + k4.mean),
        };
    }
    let q0 = evaluate_graph(&y, graph)?;
    let v0 = ScalarState { field: y.field.add(&q0), mean: y.mean };
    let t_end = u_traj.last().unwrap().0;
    let v_traj = integrate_prepared(&v0, &graph.prep, dt, t_end, 1)?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (t, su) in u_traj {
        if let Some((_, sv)) = v_traj.iter().find(|(tv, _)| (tv - t).abs() < 0.5 * dt) {
            let d = h1(&su.field.sub(&sv.field));
            if d > 10.0 * graph.tol {
                xs.push(*t);
                ys.push(d.ln());
            }
        }
    }
    if xs.len() < 4 {
        return Err(Error::InvalidSpec("completeness probe: too few points".into()));
    }
    fit_line(&xs, &ys)
}

fn neg_rhs(p: &ScalarState, graph: &ManifoldGraph) -> Result<ScalarState> {
    let r = inertial_form_rhs(p, graph)?;
    Ok(ScalarState { field: r.field.scale(-1.0), mean: -r.mean })
}

fn axpy(a: &ScalarState, k: &ScalarState, s: f64) -> ScalarState {
    ScalarState { field: a.field.add(&k.field.scale(s)), mean: a.mean + s * k.mean }
}
