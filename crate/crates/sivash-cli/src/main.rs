//! Command-line runner: configuration, orchestration, persistence and
//! reproducibility shell around the sivash library.
//!
//! Exit codes: 0 ok, 2 config error, 3 blow-up, 4 positivity lost,
//! 5 no convergence (1 for anything else).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod out;
mod study;

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "sivash",
    version,
    about = "Pseudo-spectral simulation and inertial-manifold toolkit for \
             diffusive Burgers equations with low-wavenumber instability"
)]
struct Cli {
    /// TOML configuration file ([model], [solver], [ic], [output], ...).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override a config value, e.g. --set model.alpha=4 (repeatable;
    /// applied after the file is read).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Override the output directory (shorthand for --set output.directory=...).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory; write diagnostics CSV and snapshots.
    Simulate,
    /// Run the primal, integrated and Cole-Hopf forms from one potential
    /// and report their pairwise deviations.
    Equivalence,
    /// Fit linear growth rates of tiny modes against the dispersion relation.
    Dispersion,
    /// Enumerate Laplacian eigenvalues and their gaps.
    Gaps,
    /// Ensemble absorbing-ball estimate across IC scales.
    Absorb,
    /// Estimate transform radii and probe the prepared nonlinearity's
    /// Lipschitz constant.
    Prepare,
    /// Build the inertial-manifold graph; verify attraction.
    Manifold {
        /// Explicit spectral cut index (default: auto-select via the gap
        /// condition with the probed constant).
        #[arg(long)]
        n: Option<usize>,
        /// aim_fixed_point | lyapunov_perron
        #[arg(long)]
        method: Option<String>,
        /// Fixed-point iteration budget.
        #[arg(long)]
        depth: Option<usize>,
        /// Fixed-point tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Strong-squeezing test over seeded pairs of prepared solutions.
    Squeeze,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut overrides = cli.overrides.clone();
    if let Some(out) = &cli.out {
        overrides.push(format!("output.directory={}", out.display()));
    }
    if let Command::Manifold { n, method, depth, tol } = &cli.command {
        if let Some(n) = n {
            overrides.push(format!("manifold.n={n}"));
        }
        if let Some(m) = method {
            overrides.push(format!("manifold.method={m}"));
        }
        if let Some(d) = depth {
            overrides.push(format!("manifold.depth={d}"));
        }
        if let Some(t) = tol {
            overrides.push(format!("manifold.tol={t}"));
        }
    }
    let cfg = match RunConfig::load(cli.config.as_deref(), &overrides) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let result = match &cli.command {
        Command::Simulate => commands::simulate(&cfg),
        Command::Equivalence => commands::equivalence(&cfg),
        Command::Dispersion => commands::dispersion(&cfg),
        Command::Gaps => commands::gaps(&cfg),
        Command::Absorb => study::absorb(&cfg),
        Command::Prepare => study::prepare(&cfg),
        Command::Manifold { .. } => study::manifold(&cfg),
        Command::Squeeze => study::squeeze(&cfg),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<sivash::Error>() {
            return match err {
                sivash::Error::BlowUp { .. } => 3,
                sivash::Error::PositivityLost { .. } => 4,
                sivash::Error::NoConvergence { .. } => 5,
                _ => 1,
            };
        }
        // module errors forwarded through string contexts keep their tag
        let text = cause.to_string();
        if text.contains("blow-up detected") {
            return 3;
        }
        if text.contains("positivity lost") {
            return 4;
        }
        if text.contains("no convergence") {
            return 5;
        }
    }
    1
}
