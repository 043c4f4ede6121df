//! Run configuration: TOML sections [model], [solver], [ic], [output] plus
//! optional per-subcommand sections. Unknown keys are hard errors; CLI
//! `--set section.key=value` overrides file values before validation.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use sivash::grid::{DealiasRule, GridSpec};
use sivash::ic::{mode_field, random_smooth};
use sivash::models::{Form, ModelSpec, ScalarState, State};
use sivash::multiplier::MultiplierSymbol;
use sivash::timestep::{Scheme, SolverConfig};
use sivash::vector::VectorField;
use sivash::SpectralField;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelBlock {
    pub form: Form,
    /// zero | bse | qse | kse
    pub symbol: String,
    pub alpha: f64,
    pub d: usize,
    pub n: usize,
    pub l: f64,
    pub dealias: DealiasRule,
    /// none | cosine
    pub forcing: String,
    pub forcing_modes: Vec<Vec<i64>>,
    pub forcing_amplitude: f64,
    pub forcing_phase: f64,
}

impl Default for ModelBlock {
    fn default() -> Self {
        ModelBlock {
            form: Form::Primal,
            symbol: "bse".into(),
            alpha: 2.0,
            d: 1,
            n: 128,
            l: 2.0 * std::f64::consts::PI,
            dealias: DealiasRule::TwoThirds,
            forcing: "none".into(),
            forcing_modes: vec![vec![1]],
            forcing_amplitude: 0.0,
            forcing_phase: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverBlock {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_every: usize,
    pub diag_every: usize,
    pub blowup_threshold: f64,
    pub alpha_p: u32,
}

impl Default for SolverBlock {
    fn default() -> Self {
        SolverBlock {
            scheme: Scheme::Ifrk4,
            dt: 1e-3,
            t_end: 1.0,
            snapshot_every: 0,
            diag_every: 10,
            blowup_threshold: 1e8,
            alpha_p: 4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IcMode {
    pub k: Vec<i64>,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IcBlock {
    /// random_smooth | modes | file
    pub kind: String,
    pub seed: u64,
    pub amplitude: f64,
    pub spectral_slope: f64,
    pub mean: f64,
    pub modes: Vec<IcMode>,
    pub file: Option<PathBuf>,
}

impl Default for IcBlock {
    fn default() -> Self {
        IcBlock {
            kind: "random_smooth".into(),
            seed: 0,
            amplitude: 1.0,
            spectral_slope: 2.0,
            mean: 0.0,
            modes: vec![],
            file: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub directory: PathBuf,
    pub formats: Vec<String>,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock { directory: PathBuf::from("out"), formats: vec!["csv".into(), "json".into(), "snapshots".into()] }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DispersionBlock {
    pub modes: Vec<Vec<i64>>,
    pub amplitude: f64,
    pub t_fit: f64,
}

impl Default for DispersionBlock {
    fn default() -> Self {
        DispersionBlock { modes: vec![vec![1], vec![3], vec![4], vec![5]], amplitude: 1e-8, t_fit: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GapsBlock {
    pub cutoff: i64,
    pub g_values: Vec<f64>,
}

impl Default for GapsBlock {
    fn default() -> Self {
        GapsBlock { cutoff: 1_000_000, g_values: (1..=10).map(|g| g as f64).collect() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AbsorbBlock {
    pub scales: Vec<f64>,
    pub ensemble: usize,
    pub window_frac: f64,
    pub tol: f64,
}

impl Default for AbsorbBlock {
    fn default() -> Self {
        AbsorbBlock { scales: vec![1.0, 4.0, 16.0], ensemble: 3, window_frac: 0.25, tol: 0.05 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PrepareBlock {
    pub ensemble: usize,
    pub transient_t: f64,
    pub probe_seed: u64,
    pub probe_pairs: usize,
}

impl Default for PrepareBlock {
    fn default() -> Self {
        PrepareBlock { ensemble: 8, transient_t: 20.0, probe_seed: 1234, probe_pairs: 512 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ManifoldBlock {
    /// Explicit cut index; None = auto-select from the SGC.
    pub n: Option<usize>,
    /// aim_fixed_point | lyapunov_perron
    pub method: String,
    pub depth: usize,
    pub tol: f64,
    pub safety: f64,
    pub attraction_ics: usize,
    pub attraction_t: f64,
    pub attraction_dt: f64,
}

impl Default for ManifoldBlock {
    fn default() -> Self {
        ManifoldBlock {
            n: None,
            method: "aim_fixed_point".into(),
            depth: 200,
            tol: 1e-9,
            safety: 1.5,
            attraction_ics: 20,
            attraction_t: 0.4,
            attraction_dt: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SqueezeBlock {
    pub pairs: usize,
    pub t_end: f64,
    pub dt: f64,
    pub pair_seed: u64,
}

impl Default for SqueezeBlock {
    fn default() -> Self {
        SqueezeBlock { pairs: 100, t_end: 0.4, dt: 1e-4, pair_seed: 4242 }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelBlock,
    pub solver: SolverBlock,
    pub ic: IcBlock,
    pub output: OutputBlock,
    pub dispersion: DispersionBlock,
    pub gaps: GapsBlock,
    pub absorb: AbsorbBlock,
    pub prepare: PrepareBlock,
    pub manifold: ManifoldBlock,
    pub squeeze: SqueezeBlock,
}

impl RunConfig {
    /// Load (optional) file, apply `--set` overrides, deserialize strictly,
    /// and validate cross-field constraints.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .with_context(|| format!("cannot read config {}", p.display()))?,
            None => String::new(),
        };
        let mut table: toml::Table = text.parse().context("config is not valid TOML")?;
        for ov in overrides {
            apply_override(&mut table, ov)?;
        }
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e| anyhow!("config error: {e}"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        if m.n % 2 != 0 || m.n < 8 {
            bail!("model.n must be even and >= 8, got {}", m.n);
        }
        if m.d != 1 && m.d != 2 {
            bail!("model.d must be 1 or 2, got {}", m.d);
        }
        if !(m.l > 0.0) {
            bail!("model.l must be positive");
        }
        if !(self.solver.dt > 0.0) {
            bail!("solver.dt must be positive, got {}", self.solver.dt);
        }
        if self.solver.t_end < 0.0 {
            bail!("solver.t_end must be >= 0");
        }
        if m.form.is_colehopf() && m.symbol == "kse" {
            bail!(
                "the kse symbol is unbounded and cannot be combined with a \
                 colehopf form; use the primal or integrated forms for kse"
            );
        }
        match m.symbol.as_str() {
            "zero" | "bse" | "qse" | "kse" => {}
            other => bail!("unknown symbol kind '{other}' (zero | bse | qse | kse)"),
        }
        match m.forcing.as_str() {
            "none" | "cosine" => {}
            other => bail!("unknown forcing kind '{other}' (none | cosine)"),
        }
        match self.ic.kind.as_str() {
            "random_smooth" | "modes" | "file" => {}
            other => bail!("unknown ic kind '{other}' (random_smooth | modes | file)"),
        }
        if self.ic.kind == "file" && self.ic.file.is_none() {
            bail!("ic.kind = \"file\" requires ic.file");
        }
        Ok(())
    }

    /// Serialize the fully-resolved configuration (all defaults expanded).
    pub fn resolved_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).context("cannot serialize resolved config")
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.model.d, self.model.n, self.model.l, self.model.dealias)
            .map_err(|e| anyhow!("{e}"))
    }

    pub fn symbol(&self) -> MultiplierSymbol {
        match self.model.symbol.as_str() {
            "zero" => MultiplierSymbol::Zero,
            "qse" => MultiplierSymbol::Qse { alpha: self.model.alpha },
            "kse" => MultiplierSymbol::Kse { alpha: self.model.alpha },
            _ => MultiplierSymbol::Bse { alpha: self.model.alpha },
        }
    }

    pub fn forcing_field(&self, grid: GridSpec) -> Option<SpectralField> {
        if self.model.forcing == "cosine" && self.model.forcing_amplitude != 0.0 {
            let modes: Vec<(Vec<i64>, f64, f64)> = self
                .model
                .forcing_modes
                .iter()
                .map(|k| (k.clone(), self.model.forcing_amplitude, self.model.forcing_phase))
                .collect();
            Some(mode_field(grid, &modes))
        } else {
            None
        }
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        let grid = self.grid()?;
        let g = self.forcing_field(grid);
        ModelSpec::new(self.model.form, self.symbol(), g, grid).map_err(|e| anyhow!("{e}"))
    }

    pub fn model_spec_with_form(&self, form: Form) -> Result<ModelSpec> {
        let grid = self.grid()?;
        let g = self.forcing_field(grid);
        ModelSpec::new(form, self.symbol(), g, grid).map_err(|e| anyhow!("{e}"))
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let s = &self.solver;
        let cfg = SolverConfig::new(s.scheme, s.dt, s.t_end)
            .map_err(|e| anyhow!("{e}"))?
            .with_cadence(s.snapshot_every, s.diag_every)
            .with_threshold(s.blowup_threshold);
        Ok(SolverConfig { alpha_p: s.alpha_p, ..cfg })
    }

    /// Potential φ initial condition (zero-mean field + mean scalar).
    pub fn initial_phi(&self, seed_offset: u64) -> Result<ScalarState> {
        let grid = self.grid()?;
        let field = match self.ic.kind.as_str() {
            "modes" => {
                let modes: Vec<(Vec<i64>, f64, f64)> = self
                    .ic
                    .modes
                    .iter()
                    .map(|m| (m.k.clone(), m.amplitude, m.phase))
                    .collect();
                mode_field(grid, &modes)
            }
            "file" => {
                let path = self.ic.file.as_ref().expect("validated");
                let doc: serde_json::Value = serde_json::from_reader(
                    std::fs::File::open(path)
                        .with_context(|| format!("cannot open ic file {}", path.display()))?,
                )?;
                let (f, _, _) = sivash::io::snapshot_to_field(&doc).map_err(|e| anyhow!("{e}"))?;
                if !f.grid.same_geometry(&grid) {
                    bail!("ic file grid does not match the model grid");
                }
                f.subtract_mean()
            }
            _ => random_smooth(
                grid,
                self.ic.seed.wrapping_add(seed_offset),
                self.ic.amplitude,
                self.ic.spectral_slope,
            ),
        };
        Ok(ScalarState { field, mean: self.ic.mean })
    }

    /// Initial state in the representation of the configured form.
    pub fn initial_state(&self, seed_offset: u64) -> Result<State> {
        let phi = self.initial_phi(seed_offset)?;
        Ok(match self.model.form {
            Form::Primal => State::Primal(VectorField::gradient_of(&phi.field)),
            f if f.is_colehopf() => State::Scalar(sivash::colehopf::psi_from_phi(&phi)),
            _ => State::Scalar(phi),
        })
    }
}

/// Apply one `section.key=value` override. The value is parsed as a TOML
/// literal when possible, else taken as a string.
fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| anyhow!("override '{spec}' is not of the form key=value"))?;
    let path: Vec<&str> = path.trim().split('.').collect();
    if path.is_empty() || path.iter().any(|p| p.is_empty()) {
        bail!("override '{spec}' has an empty key path");
    }
    let value = parse_toml_value(raw.trim());
    let mut cur = table;
    for part in &path[..path.len() - 1] {
        cur = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| anyhow!("override '{spec}' descends into a non-table"))?;
    }
    cur.insert(path.last().unwrap().to_string(), value);
    Ok(())
}

fn parse_toml_value(raw: &str) -> toml::Value {
    let wrapped = format!("x = {raw}");
    if let Ok(t) = wrapped.parse::<toml::Table>() {
        if let Some(v) = t.get("x") {
            return v.clone();
        }
    }
    toml::Value::String(raw.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let dir = std::env::temp_dir().join("sivash_cfg_test");
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("m.toml");
        std::fs::write(&p, "[model]\nform = \"primal\"\nalpha = 3.0\n").unwrap();
        let cfg = RunConfig::load(Some(&p), &[]).unwrap();
        assert_eq!(cfg.model.alpha, 3.0);
        assert_eq!(cfg.model.n, 128);
        assert_eq!(cfg.solver.dt, 1e-3);
    }

    #[test]
    fn unknown_keys_rejected() {
        let dir = std::env::temp_dir().join("sivash_cfg_test2");
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("bad.toml");
        std::fs::write(&p, "[model]\nbogus_key = 1\n").unwrap();
        assert!(RunConfig::load(Some(&p), &[]).is_err());
    }

    #[test]
    fn kse_colehopf_rejected() {
        let cfg = RunConfig::load(
            None,
            &["model.form=colehopf".into(), "model.symbol=kse".into()],
        );
        assert!(cfg.is_err());
    }

    #[test]
    fn odd_n_rejected() {
        assert!(RunConfig::load(None, &["model.n=65".into()]).is_err());
        assert!(RunConfig::load(None, &["solver.dt=-0.1".into()]).is_err());
    }

    #[test]
    fn resolved_round_trip_is_identical() {
        let cfg = RunConfig::load(None, &["model.alpha=4.5".into(), "solver.dt=0.002".into()])
            .unwrap();
        let text = cfg.resolved_toml().unwrap();
        let dir = std::env::temp_dir().join("sivash_cfg_test3");
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("resolved.toml");
        std::fs::write(&p, &text).unwrap();
        let cfg2 = RunConfig::load(Some(&p), &[]).unwrap();
        assert_eq!(text, cfg2.resolved_toml().unwrap());
    }
}
