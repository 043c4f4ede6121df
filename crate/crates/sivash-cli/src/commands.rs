//! Subcommands: simulate, equivalence, dispersion, gaps.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::json;

use sivash::colehopf::{psi_from_phi, u_from_psi};
use sivash::diagnostics::growth_rate_fit;
use sivash::exec;
use sivash::field::NormKind;
use sivash::ic::mode_field;
use sivash::io::write_records_csv;
use sivash::models::{linear_dispersion, Form, ScalarState, State};
use sivash::spectrum::enumerate;
use sivash::timestep::{integrate, NullSink, SolverConfig, Trajectory};
use sivash::vector::VectorField;

use crate::config::RunConfig;
use crate::out;

fn csv_writer(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    Ok(BufWriter::new(
        File::create(&path).with_context(|| format!("cannot create {}", path.display()))?,
    ))
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// simulate: one trajectory with diagnostics CSV and snapshots.
pub fn simulate(cfg: &RunConfig) -> Result<()> {
    let dir = out::out_dir(cfg)?;
    out::write_manifest(&dir, "simulate", cfg)?;
    out::write_schema(&dir, &[])?;
    let spec = cfg.model_spec()?;
    let solver = cfg.solver_config()?;
    let state0 = cfg.initial_state(0)?;
    let form_name = format!("{:?}", cfg.model.form).to_lowercase();
    let traj = integrate(&state0, &spec, &solver, &mut NullSink)?;
    let mut w = csv_writer(&dir, "trajectory.csv")?;
    write_records_csv(&mut w, &traj.records)?;
    w.flush()?;
    for (i, (t, state)) in traj.snapshots.iter().enumerate() {
        out::write_snapshot(&dir, i, *t, state, &form_name)?;
    }
    let last = traj.records.last().expect("at least the initial record");
    out::write_json(
        dir.join("summary.json"),
        &json!({
            "t_final": last.t,
            "l2_u_final": last.l2_u,
            "h1_u_final": last.h1_u,
            "mean_final": last.mean,
            "max_mean_residual": sivash::diagnostics::mean_residual(&traj),
            "cfl_violations": traj.cfl_violations,
            "snapshots": traj.snapshots.len(),
        }),
    )?;
    Ok(())
}

/// equivalence: evolve the three formulations from the same potential and
/// report the pairwise deviations of U over time.
pub fn equivalence(cfg: &RunConfig) -> Result<()> {
    let dir = out::out_dir(cfg)?;
    out::write_manifest(&dir, "equivalence", cfg)?;
    out::write_schema(
        &dir,
        &[(
            "equivalence.csv",
            &[
                ("t", "time"),
                ("u_l2", "L2 norm of the primal U"),
                ("dev_integrated", "relative L2 deviation of grad(phi) from U"),
                ("dev_colehopf", "relative L2 deviation of the Cole-Hopf lifted U"),
            ],
        )],
    )?;
    if !cfg.symbol().is_bounded() {
        bail!("equivalence needs a bounded symbol (the colehopf leg rejects kse)");
    }
    let solver = cfg.solver_config()?;
    let snap_every = solver.diag_every;
    let solver = SolverConfig { snapshot_every: snap_every, ..solver };
    let phi0 = cfg.initial_phi(0)?;
    let spec_p = cfg.model_spec_with_form(Form::Primal)?;
    let spec_i = cfg.model_spec_with_form(Form::IntegratedAdopted)?;
    let spec_c = cfg.model_spec_with_form(Form::Colehopf)?;
    let u0 = State::Primal(VectorField::gradient_of(&phi0.field));
    let runs: Vec<Trajectory> = {
        let jobs: Vec<(State, sivash::ModelSpec)> = vec![
            (u0, spec_p),
            (State::Scalar(phi0.clone()), spec_i),
            (State::Scalar(psi_from_phi(&phi0)), spec_c),
        ];
        exec::map_collect(jobs, |(s0, spec)| integrate(&s0, &spec, &solver, &mut NullSink))
            .into_iter()
            .collect::<sivash::Result<_>>()?
    };
    let (tp, ti, tc) = (&runs[0], &runs[1], &runs[2]);
    let mut w = csv_writer(&dir, "equivalence.csv")?;
    writeln!(w, "t,u_l2,dev_integrated,dev_colehopf")?;
    let mut max_dev_i: f64 = 0.0;
    let mut max_dev_c: f64 = 0.0;
    for ((tu, su), ((_, si), (_, sc))) in tp
        .snapshots
        .iter()
        .zip(ti.snapshots.iter().zip(tc.snapshots.iter()))
    {
        let u = su.as_primal().map_err(anyhow::Error::msg)?;
        let u_l2 = u.norm(NormKind::L2).map_err(anyhow::Error::msg)?;
        let scale = u_l2.max(1e-30);
        let ui = VectorField::gradient_of(&si.as_scalar().map_err(anyhow::Error::msg)?.field);
        let uc = u_from_psi(sc.as_scalar().map_err(anyhow::Error::msg)?)
            .map_err(anyhow::Error::msg)?;
        let dev_i = u.sub(&ui).norm(NormKind::L2).map_err(anyhow::Error::msg)? / scale;
        let dev_c = u.sub(&uc).norm(NormKind::L2).map_err(anyhow::Error::msg)? / scale;
        max_dev_i = max_dev_i.max(dev_i);
        max_dev_c = max_dev_c.max(dev_c);
        writeln!(w, "{},{},{},{}", fmt(*tu), fmt(u_l2), fmt(dev_i), fmt(dev_c))?;
    }
    w.flush()?;
    out::write_json(
        dir.join("equivalence.json"),
        &json!({
            "max_dev_integrated": max_dev_i,
            "max_dev_colehopf": max_dev_c,
        }),
    )?;
    Ok(())
}

/// dispersion: fit linear growth rates of tiny modes against ω = −κ² + m(k).
pub fn dispersion(cfg: &RunConfig) -> Result<()> {
    let dir = out::out_dir(cfg)?;
    out::write_manifest(&dir, "dispersion", cfg)?;
    out::write_schema(
        &dir,
        &[(
            "dispersion.csv",
            &[
                ("k", "integer mode (joined with ';' in 2D)"),
                ("kappa", "scaled wavenumber 2pi|k|/L"),
                ("omega_fit", "least-squares growth rate of log|c_k|"),
                ("omega_exact", "linear dispersion -kappa^2 + m(k)"),
                ("rel_err", "relative error of the fit"),
                ("fit_residual", "rms residual of the log-linear fit"),
            ],
        )],
    )?;
    let spec = cfg.model_spec_with_form(Form::IntegratedAdopted)?;
    let grid = spec.grid;
    let d = &cfg.dispersion;
    let solver = SolverConfig {
        snapshot_every: 1,
        diag_every: (d.t_fit / cfg.solver.dt / 50.0).ceil().max(1.0) as usize,
        t_end: d.t_fit,
        ..cfg.solver_config()?
    };
    let rows: Vec<Result<(Vec<i64>, f64, f64, f64, f64, f64)>> =
        exec::map_collect(d.modes.clone(), |k| {
            let field = mode_field(grid, &[(k.clone(), d.amplitude, 0.0)]);
            let state = State::Scalar(ScalarState { field, mean: 0.0 });
            let traj = integrate(&state, &spec, &solver, &mut NullSink)
                .map_err(anyhow::Error::msg)?;
            let fit = growth_rate_fit(&traj, &k).map_err(anyhow::Error::msg)?;
            let omega = linear_dispersion(&spec.symbol, &k, &grid).map_err(anyhow::Error::msg)?;
            let kappa = grid.k0() * ((k.iter().map(|x| x * x).sum::<i64>() as f64).sqrt());
            let rel = (fit.omega - omega).abs() / omega.abs().max(1e-12);
            Ok((k, kappa, fit.omega, omega, rel, fit.residual))
        });
    let mut w = csv_writer(&dir, "dispersion.csv")?;
    writeln!(w, "k,kappa,omega_fit,omega_exact,rel_err,fit_residual")?;
    let mut max_rel: f64 = 0.0;
    for row in rows {
        let (k, kappa, omega_fit, omega_exact, rel, residual) = row?;
        let kstr = k.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";");
        max_rel = max_rel.max(rel);
        writeln!(
            w,
            "{kstr},{},{},{},{},{}",
            fmt(kappa),
            fmt(omega_fit),
            fmt(omega_exact),
            fmt(rel),
            fmt(residual)
        )?;
    }
    w.flush()?;
    out::write_json(dir.join("dispersion.json"), &json!({ "max_rel_err": max_rel }))?;
    Ok(())
}

/// gaps: eigenvalue table, gap list CSV, and the first-index summary.
pub fn gaps(cfg: &RunConfig) -> Result<()> {
    let dir = out::out_dir(cfg)?;
    out::write_manifest(&dir, "gaps", cfg)?;
    out::write_schema(
        &dir,
        &[(
            "gaps.csv",
            &[
                ("n", "index into the distinct-eigenvalue table"),
                ("lambda_n", "eigenvalue (2pi/L)^2 |k|^2"),
                ("gap", "lambda_{n+1} - lambda_n"),
            ],
        )],
    )?;
    let table = enumerate(cfg.model.d, cfg.model.l, cfg.gaps.cutoff)
        .map_err(anyhow::Error::msg)?;
    let gaps = table.gaps();
    let mut w = csv_writer(&dir, "gaps.csv")?;
    writeln!(w, "n,lambda_n,gap")?;
    let mut max_gap: f64 = 0.0;
    for (n, g) in &gaps {
        max_gap = max_gap.max(*g);
        writeln!(w, "{n},{},{}", fmt(table.lambda(*n)), fmt(*g))?;
    }
    w.flush()?;
    let mut first_n = serde_json::Map::new();
    for g in &cfg.gaps.g_values {
        first_n.insert(
            format!("{g}"),
            match table.first_index_with_gap(*g) {
                Some(n) => json!(n),
                None => serde_json::Value::Null,
            },
        );
    }
    out::write_json(
        dir.join("gaps.json"),
        &json!({
            "d": cfg.model.d,
            "l": cfg.model.l,
            "cutoff": cfg.gaps.cutoff,
            "distinct_eigenvalues": table.entries.len(),
            "max_gap": max_gap,
            "first_n_for": first_n,
        }),
    )?;
    Ok(())
}
