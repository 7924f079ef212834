//! `hjnet`: batch front-end for building spaces, measuring distances,
//! solving Hamilton-Jacobi equations and running stability experiments.
//!
//! Every command reads a JSON configuration (`--config` file, overlaid by
//! `--json` and by flags) and writes CSV whose first line is `# ` followed
//! by the fully resolved configuration. The exit code is 0 on success, 1
//! when a checking command returns FAIL and 2 on error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use hjnet::Verdict;

use commands::{Overrides, Sink};
use config::{parse_point, parse_source, RawConfig};

#[derive(Parser)]
#[command(name = "hjnet", version, about = "Metric networks and Hamilton-Jacobi equations on them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Inline JSON object overlaid on the configuration file.
    #[arg(long, global = true, value_name = "JSON")]
    json: Option<String>,
    /// Output directory; standard output when absent.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for every random draw, echoed in all outputs (default 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Sample spacing.
    #[arg(long, global = true)]
    density: Option<f64>,
    /// Comma-separated, strictly increasing level list.
    #[arg(long, global = true, value_delimiter = ',')]
    levels: Option<Vec<usize>>,
}

#[derive(Subcommand)]
enum Command {
    /// Build a space and write its network JSON.
    ///
    /// The configuration is a space descriptor such as
    /// {"kind":"koch","n":3}. With --levels one file per level is written
    /// to --out as <kind>_<n>.json. The resolved descriptor and seed are
    /// stored under "meta".
    Build {
        /// Inline descriptor, same as --json.
        #[arg(long, value_name = "JSON")]
        space: Option<String>,
    },
    /// Intrinsic distance between two points of a network.
    ///
    /// Keys: network (file path or descriptor), from, to ([x, y]),
    /// snap (default 1e-9: how far a point may lie off the network).
    Dist {
        /// Network file or inline descriptor.
        #[arg(long)]
        network: Option<String>,
        /// Start point as x,y.
        #[arg(long, allow_hyphen_values = true)]
        from: Option<String>,
        /// End point as x,y.
        #[arg(long, allow_hyphen_values = true)]
        to: Option<String>,
    },
    /// Hausdorff distance between two sampled spaces.
    ///
    /// Keys: a, b (descriptors), density, metric (euclidean | manhattan;
    /// default manhattan if either space is a lattice or plane), levels
    /// (substituted into a, one row each).
    Hausdorff {
        #[arg(long, value_name = "JSON")]
        a: Option<String>,
        #[arg(long, value_name = "JSON")]
        b: Option<String>,
        #[arg(long)]
        metric: Option<String>,
    },
    /// Solve on one network and write the field CSV.
    ///
    /// Keys: network, solver ({"kind": "eikonal" | "discounted" |
    /// "hopf_lax", ...}, default eikonal), lambda (default 0), forcing
    /// (constant or per-edge list, default 1), boundary ([{"at": [x, y],
    /// "value": g}]), h_solver (default a quarter of the shortest edge),
    /// snap.
    Solve {
        #[arg(long)]
        network: Option<String>,
    },
    /// Run a stability experiment; writes report.csv and plot.dat.
    ///
    /// Keys: family, levels, limit, solver, lambda, forcing, boundary,
    /// density, radii, window (default 3), h2, tolerance (default 0.05 on
    /// the deepest level's sup-error). Exit code 1 on FAIL.
    Stability,
    /// Check that level distances converge to the limit distance.
    ///
    /// Keys: family, levels, limit, ambient, pairs (default 200), probes
    /// (default 0), density, tolerance (default 0.05 on the deepest
    /// level's gap). Exit code 1 on FAIL.
    CheckH2,
    /// Test a field CSV for viscosity sub/supersolution violations.
    ///
    /// Keys: network, field, lambda (default 0), forcing (default 1), mode
    /// (SUB | SUPER, default both), anchors (default every vertex), k_grid
    /// (default [0, 0.5, 1, 2, 4]), radius (default twice the largest node
    /// gap), tol (default 1e-9), exclude. Exit code 1 on any violation.
    ViscosityCheck {
        #[arg(long)]
        network: Option<String>,
        #[arg(long, value_name = "CSV")]
        field: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<Option<Verdict>> {
    let c = &cli.common;
    let mut raw = RawConfig::load(c.config.as_deref(), c.json.as_deref())?;
    let ov = Overrides { seed: c.seed, density: c.density, levels: c.levels.clone() };
    let sink = Sink::new(c.out.clone())?;
    match cli.command {
        Command::Build { space } => {
            if let Some(s) = space {
                raw = RawConfig::load(c.config.as_deref(), Some(&s))?;
            }
            commands::build(raw, &ov, &sink)
        }
        Command::Dist { network, from, to } => {
            if let Some(n) = network {
                raw.set("network", parse_source(&n)?);
            }
            if let Some(p) = from {
                raw.set("from", parse_point(&p)?);
            }
            if let Some(p) = to {
                raw.set("to", parse_point(&p)?);
            }
            commands::dist(raw, &ov, &sink)
        }
        Command::Hausdorff { a, b, metric } => {
            if let Some(a) = a {
                raw.set("a", serde_json::from_str::<serde_json::Value>(&a)?);
            }
            if let Some(b) = b {
                raw.set("b", serde_json::from_str::<serde_json::Value>(&b)?);
            }
            if let Some(m) = metric {
                raw.set("metric", m);
            }
            commands::hausdorff(raw, &ov, &sink)
        }
        Command::Solve { network } => {
            if let Some(n) = network {
                raw.set("network", parse_source(&n)?);
            }
            commands::solve(raw, &ov, &sink)
        }
        Command::Stability => commands::stability(raw, &ov, &sink),
        Command::CheckH2 => commands::check_h2_cmd(raw, &ov, &sink),
        Command::ViscosityCheck { network, field } => {
            if let Some(n) = network {
                raw.set("network", parse_source(&n)?);
            }
            if let Some(f) = field {
                raw.set("field", f.to_string_lossy().into_owned());
            }
            commands::viscosity(raw, &ov, &sink)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Some(Verdict::Fail)) => ExitCode::from(1),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
