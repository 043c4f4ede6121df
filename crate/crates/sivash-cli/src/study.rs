//! Subcommands around the dissipativity and manifold machinery:
//! absorb, prepare, manifold, squeeze.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::json;

use sivash::colehopf::{estimate_radii, lipschitz_probe, psi_from_phi, PreparedNonlinearity};
use sivash::diagnostics::{absorbing_entry, AbsorbingConfig};
use sivash::exec;
use sivash::field::NormKind;
use sivash::ic::random_smooth;
use sivash::manifold::{
    attraction_fit, auto_cut, band_table, evaluate_graph_warm, graph_distance,
    graph_lipschitz_probe, integrate_prepared, GraphMethod, ManifoldGraph, ProjectionPair,
    Projector,
};
use sivash::models::{Form, ScalarState, State};
use sivash::timestep::{integrate, NullSink, Trajectory};

use crate::config::RunConfig;
use crate::out;

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_writer(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    Ok(BufWriter::new(
        File::create(&path).with_context(|| format!("cannot create {}", path.display()))?,
    ))
}

/// Seeded random direction inside one projector block, normalized to
/// `amp` in Ḣ¹ after the projection (the raw field's norm would leak
/// almost entirely into the other block).
fn projected_direction(
    graph: &ManifoldGraph,
    seed: u64,
    amp: f64,
    which: Projector,
) -> sivash::SpectralField {
    let raw = random_smooth(graph.proj.grid, seed, 1.0, 1.0);
    let part = graph
        .proj
        .project(&ScalarState { field: raw, mean: 0.0 }, which)
        .field;
    let h1 = part.norm(NormKind::Hs(1.0)).unwrap_or(0.0);
    if h1 > 0.0 {
        part.scale(amp / h1)
    } else {
        part
    }
}

/// absorb: ensembles at several IC scales, empirical absorbing radius and
/// entry time per scale, uniformity ratio across scales.
pub fn absorb(cfg: &RunConfig) -> Result<()> {
    let dir = out::out_dir(cfg)?;
    out::write_manifest(&dir, "absorb", cfg)?;
    out::write_schema(
        &dir,
        &[(
            "absorb.csv",
            &[
                ("t", "time"),
                ("scale", "IC scale factor"),
                ("sup_h1_u", "sup over the ensemble of the H1 seminorm of U"),
            ],
        )],
    )?;
    let solver = cfg.solver_config()?;
    let ab = &cfg.absorb;
    if ab.scales.is_empty() || ab.ensemble == 0 {
        bail!("absorb needs at least one scale and one ensemble member");
    }
    let mut per_scale = Vec::new();
    let mut w = csv_writer(&dir, "absorb.csv")?;
    writeln!(w, "t,scale,sup_h1_u")?;
    for (si, scale) in ab.scales.iter().enumerate() {
        let jobs: Vec<u64> = (0..ab.ensemble as u64).collect();
        let trajs: Vec<Trajectory> = exec::map_collect(jobs, |member| {
            let phi0 = cfg
                .initial_phi(1000 * si as u64 + member)
                .map_err(|e| sivash::Error::InvalidSpec(e.to_string()))?;
            let scaled = ScalarState { field: phi0.field.scale(*scale), mean: phi0.mean };
            let state0 = match cfg.model.form {
                Form::Primal => {
                    State::Primal(sivash::vector::VectorField::gradient_of(&scaled.field))
                }
                f if f.is_colehopf() => State::Scalar(psi_from_phi(&scaled)),
                _ => State::Scalar(scaled),
            };
            integrate(&state0, &cfg.model_spec().map_err(|e| sivash::Error::InvalidSpec(e.to_string()))?, &solver, &mut NullSink)
        })
        .into_iter()
        .collect::<sivash::Result<_>>()?;
        for i in 0..trajs[0].records.len() {
            let t = trajs[0].records[i].t;
            let sup = trajs.iter().map(|tr| tr.records[i].h1_u).fold(0.0_f64, f64::max);
            writeln!(w, "{},{},{}", fmt(t), fmt(*scale), fmt(sup))?;
        }
        let est = absorbing_entry(
            &trajs,
            &AbsorbingConfig { window_frac: ab.window_frac, tol: ab.tol, abs_floor: 0.0 },
        )?;
        per_scale.push(json!({
            "scale": scale,
            "radius_h1": est.radius_h1,
            "entry_time": est.entry_time,
            "window": est.window,
            "ensemble": est.ensemble.len(),
        }));
    }
    w.flush()?;
    let radii: Vec<f64> = per_scale
        .iter()
        .map(|v| v["radius_h1"].as_f64().unwrap())
        .collect();
    let ratio = radii.iter().cloned().fold(0.0_f64, f64::max)
        / radii.iter().cloned().fold(f64::INFINITY, f64::min).max(1e-300);
    out::write_json(
        dir.join("absorbing.json"),
        &json!({ "per_scale": per_scale, "radius_ratio_max_over_min": ratio }),
    )?;
    Ok(())
}

/// Shared pipeline: integrate an ensemble to post-transient φ states and
/// build the prepared nonlinearity with its probed Lipschitz constant.
/// Returns the ensemble states for reuse as manifold/squeeze bases.
pub fn build_prep(
    cfg: &RunConfig,
) -> Result<(PreparedNonlinearity, Vec<ScalarState>, serde_json::Value)> {
    let pb = &cfg.prepare;
    let spec_i = cfg.model_spec_with_form(Form::IntegratedAdopted)?;
    let mut solver = cfg.solver_config()?;
    solver.t_end = pb.transient_t;
    solver.diag_every = ((pb.transient_t / solver.dt) as usize / 50).max(1);
    let jobs: Vec<u64> = (0..pb.ensemble as u64).collect();
    let states: Vec<ScalarState> = exec::map_collect(jobs, |member| {
        let phi0 = cfg
            .initial_phi(member)
            .map_err(|e| sivash::Error::InvalidSpec(e.to_string()))?;
        let traj = integrate(&State::Scalar(phi0), &spec_i, &solver, &mut NullSink)?;
        Ok(traj.final_state().as_scalar()?.clone())
    })
    .into_iter()
    .collect::<sivash::Result<_>>()?;
    let (radii, chain_ratio) = estimate_radii(&states).map_err(anyhow::Error::msg)?;
    let spec_c = cfg.model_spec_with_form(Form::Colehopf)?;
    let mut prep = PreparedNonlinearity::new(radii, spec_c).map_err(anyhow::Error::msg)?;
    let report = lipschitz_probe(&prep, pb.probe_seed, pb.probe_pairs).map_err(anyhow::Error::msg)?;
    prep.c_est = report.c_est;
    let info = json!({
        "radii": radii,
        "h2_chain_ratio": chain_ratio,
        "probe": report,
        "ensemble": pb.ensemble,
        "transient_t": pb.transient_t,
    });
    Ok((prep, states, info))
}

/// prepare: radii + Lipschitz probe report.
pub fn prepare(cfg: &RunConfig) -> Result<()> {
    let dir = out::out_dir(cfg)?;
    out::write_manifest(&dir, "prepare", cfg)?;
    out::write_schema(&dir, &[])?;
    let (_prep, _states, info) = build_prep(cfg)?;
    out::write_json(dir.join("prepared.json"), &info)?;
    Ok(())
}

pub fn build_graph(
    cfg: &RunConfig,
) -> Result<(ManifoldGraph, Vec<ScalarState>, serde_json::Value)> {
    let (prep, states, prep_info) = build_prep(cfg)?;
    let grid = cfg.grid()?;
    let table = band_table(&grid).map_err(anyhow::Error::msg)?;
    let mb = &cfg.manifold;
    let n = match mb.n {
        Some(n) => n,
        None => auto_cut(&table, prep.c_est, mb.safety).map_err(|_| {
            anyhow!(
                "no spectral gap of size {} inside the resolved band; \
                 raise the resolution or lower the safety factor",
                4.0 * mb.safety * prep.c_est
            )
        })?,
    };
    let proj = ProjectionPair::new(grid, &table, n).map_err(anyhow::Error::msg)?;
    let method = match mb.method.as_str() {
        "lyapunov_perron" => GraphMethod::LyapunovPerron,
        "aim_fixed_point" => GraphMethod::AimFixedPoint,
        other => bail!("unknown manifold method '{other}'"),
    };
    let mut graph = ManifoldGraph::new(proj, prep, method).with_tol(mb.tol);
    graph.depth = mb.depth;
    let info = json!({
        "prepared": prep_info,
        "n": n,
        "lambda_n": graph.proj.lambda_n,
        "lambda_n1": graph.proj.lambda_n1,
        "dim_p": graph.proj.dim_p,
        "method": graph.method,
        "tol": graph.tol,
        "safety": mb.safety,
    });
    Ok((graph, states, info))
}

/// manifold: build the graph, sample it, probe its Lipschitz constant,
/// fit exponential attraction over seeded ICs.
pub fn manifold(cfg: &RunConfig) -> Result<()> {
    let dir = out::out_dir(cfg)?;
    out::write_manifest(&dir, "manifold", cfg)?;
    out::write_schema(
        &dir,
        &[
            (
                "attraction.csv",
                &[
                    ("ic", "seeded IC index"),
                    ("mu", "fitted exponential attraction rate"),
                    ("r2", "fit R^2"),
                    ("c_u", "fitted prefactor"),
                    ("n_points", "points used in the fit"),
                    ("pass", "mu > 0 and R^2 >= 0.95"),
                ],
            ),
            (
                "distance_000.csv",
                &[("t", "time"), ("distance", "graph distance of the first IC")],
            ),
        ],
    )?;
    let (graph, states, info) = build_graph(cfg)?;
    let mb = &cfg.manifold;
    // graph samples: P projections of the transformed ensemble states plus
    // seeded P points
    let mut samples = Vec::new();
    for phi in &states {
        let p = graph.proj.project(&psi_from_phi(phi), Projector::P);
        let (q, _) = evaluate_graph_warm(&p, &graph, None).map_err(anyhow::Error::msg)?;
        samples.push(json!({
            "p_h1": p.field.norm(NormKind::Hs(1.0)).map_err(anyhow::Error::msg)?,
            "mean": p.mean,
            "q_h1": q.norm(NormKind::Hs(1.0)).map_err(anyhow::Error::msg)?,
        }));
    }
    for seed in 0..8u64 {
        let field = random_smooth(graph.proj.grid, 500 + seed, 0.3 * graph.prep.inner_radius, 2.0);
        let p = graph
            .proj
            .project(&ScalarState { field, mean: 1.0 }, Projector::P);
        let (q, _) = evaluate_graph_warm(&p, &graph, None).map_err(anyhow::Error::msg)?;
        samples.push(json!({
            "p_h1": p.field.norm(NormKind::Hs(1.0)).map_err(anyhow::Error::msg)?,
            "mean": p.mean,
            "q_h1": q.norm(NormKind::Hs(1.0)).map_err(anyhow::Error::msg)?,
        }));
    }
    let l_est = graph_lipschitz_probe(&graph, cfg.prepare.probe_seed ^ 0x5eed, 64)
        .map_err(anyhow::Error::msg)?;
    // attraction over seeded ICs: transformed post-transient bases plus
    // Q-direction offsets of varying size
    let bases: Vec<ScalarState> = states.iter().map(psi_from_phi).collect();
    let jobs: Vec<u64> = (0..mb.attraction_ics as u64).collect();
    let record_every = ((mb.attraction_t / mb.attraction_dt) as usize / 400).max(1);
    let fits: Vec<sivash::Result<sivash::manifold::AttractionFit>> =
        exec::map_collect(jobs, |seed| {
            let base = &bases[seed as usize % bases.len()];
            let amp = 0.02 + 0.01 * (seed % 5) as f64;
            let qdir = projected_direction(&graph, 900 + seed, amp, Projector::Q);
            let ic = ScalarState { field: base.field.add(&qdir), mean: base.mean };
            let traj = integrate_prepared(&ic, &graph.prep, mb.attraction_dt, mb.attraction_t, record_every)?;
            attraction_fit(&traj, &graph, 0.05)
        });
    let mut w = csv_writer(&dir, "attraction.csv")?;
    writeln!(w, "ic,mu,r2,c_u,n_points,pass")?;
    let mut all_pass = true;
    for (i, fit) in fits.into_iter().enumerate() {
        let fit = fit.map_err(anyhow::Error::msg)?;
        all_pass &= fit.pass;
        writeln!(
            w,
            "{i},{},{},{},{},{}",
            fmt(fit.mu),
            fmt(fit.r2),
            fmt(fit.c_u),
            fit.n_points,
            fit.pass
        )?;
    }
    w.flush()?;
    // distance series for the first IC
    {
        let base = &bases[0];
        let qdir = projected_direction(&graph, 900, 0.02, Projector::Q);
        let ic = ScalarState { field: base.field.add(&qdir), mean: base.mean };
        let traj =
            integrate_prepared(&ic, &graph.prep, mb.attraction_dt, mb.attraction_t, record_every)
                .map_err(anyhow::Error::msg)?;
        let mut w = csv_writer(&dir, "distance_000.csv")?;
        writeln!(w, "t,distance")?;
        for (t, s) in &traj {
            let d = graph_distance(s, &graph).map_err(anyhow::Error::msg)?;
            writeln!(w, "{},{}", fmt(*t), fmt(d))?;
        }
        w.flush()?;
    }
    out::write_json(
        dir.join("manifold.json"),
        &json!({
            "setup": info,
            "l_est": l_est,
            "graph_samples": samples,
            "attraction_all_pass": all_pass,
        }),
    )?;
    Ok(())
}

/// squeeze: strong-squeezing dichotomy over seeded pairs of prepared
/// solutions.
pub fn squeeze(cfg: &RunConfig) -> Result<()> {
    let dir = out::out_dir(cfg)?;
    out::write_manifest(&dir, "squeeze", cfg)?;
    out::write_schema(&dir, &[])?;
    let (graph, states, info) = build_graph(cfg)?;
    let sq = &cfg.squeeze;
    let bases: Vec<ScalarState> = states.iter().map(psi_from_phi).collect();
    let jobs: Vec<u64> = (0..sq.pairs as u64).collect();
    let record_every = ((sq.t_end / sq.dt) as usize / 200).max(1);
    let reports: Vec<sivash::Result<sivash::manifold::SqueezingReport>> =
        exec::map_collect(jobs, |i| {
            let seed = sq.pair_seed.wrapping_add(i);
            let base = &bases[i as usize % bases.len()];
            let p_pert = projected_direction(&graph, seed, 0.04, Projector::P);
            let q_pert = projected_direction(&graph, seed ^ 0xffff, 0.04, Projector::Q);
            // even pairs start inside the cone, odd pairs outside
            let u0 = if i % 2 == 0 {
                ScalarState {
                    field: base.field.add(&p_pert).add(&q_pert.scale(0.2)),
                    mean: base.mean,
                }
            } else {
                ScalarState {
                    field: base.field.add(&q_pert).add(&p_pert.scale(0.2)),
                    mean: base.mean,
                }
            };
            sivash::manifold::squeezing_test(&u0, &base, &graph, sq.dt, sq.t_end, record_every)
        });
    let mut all_cone = true;
    let mut exterior_rates_positive = true;
    let mut rows = Vec::new();
    for (i, r) in reports.into_iter().enumerate() {
        let r = r.map_err(anyhow::Error::msg)?;
        all_cone &= r.cone_held;
        if !r.started_in_cone {
            exterior_rates_positive &= r.q_decay_rate.map(|v| v > 0.0).unwrap_or(false)
                || r.entry_time.is_some();
        }
        rows.push(json!({
            "pair": i,
            "started_in_cone": r.started_in_cone,
            "cone_held": r.cone_held,
            "entry_time": r.entry_time,
            "q_decay_rate": r.q_decay_rate,
            "pass": r.pass,
        }));
    }
    out::write_json(
        dir.join("squeeze.json"),
        &json!({
            "setup": info,
            "pairs": sq.pairs,
            "all_cone_held": all_cone,
            "exterior_decay_positive": exterior_rates_positive,
            "reports": rows,
        }),
    )?;
    Ok(())
}
