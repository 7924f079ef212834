use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use hjnet::hausdorff::{check_h2, hausdorff_distance, sample, H2Options, SpaceSequence, Verdict};
use hjnet::metric::NetworkFile;
use hjnet::solvers::{
    hopf_lax_evolve, solve_discounted, solve_eikonal, viscosity_check, write_violations_csv,
    DiscountedOptions, HamiltonianSpec, ViscosityOptions,
};
use hjnet::stability::SolverChoice;
use hjnet::{
    intrinsic_distance, MetricNetwork, Mode, NetPoint, ScalarField, SpaceDescriptor, StabilityExperiment,
};
use serde_json::Value;

use crate::config::{
    resolved, CheckH2Config, DistConfig, HausdorffConfig, RawConfig, SolveConfig, ViscosityConfig,
    DEFAULT_STABILITY_TOLERANCE,
};

/// Where command output goes: files under `--out`, or standard output.
pub struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>) -> Result<Self> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
        }
        Ok(Self { dir })
    }

    fn is_stdout(&self) -> bool {
        self.dir.is_none()
    }

    /// Writes `name` (or stdout) starting with the `# {config}` line.
    fn emit<F>(&self, name: &str, config: &Value, body: F) -> Result<()>
    where
        F: FnOnce(&mut dyn Write) -> Result<()>,
    {
        self.raw(name, |w| {
            writeln!(w, "# {config}")?;
            body(w)
        })
    }

    fn raw<F>(&self, name: &str, body: F) -> Result<()>
    where
        F: FnOnce(&mut dyn Write) -> Result<()>,
    {
        match &self.dir {
            Some(dir) => {
                let path = dir.join(name);
                let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                let mut w = BufWriter::new(file);
                body(&mut w)?;
                w.flush()?;
            }
            None => {
                let stdout = io::stdout();
                let mut w = stdout.lock();
                body(&mut w)?;
                w.flush()?;
            }
        }
        Ok(())
    }
}

/// Global flags that rewrite configuration keys.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub density: Option<f64>,
    pub levels: Option<Vec<usize>>,
}

impl Overrides {
    fn apply(&self, raw: &mut RawConfig, density: bool, levels: bool) -> Result<()> {
        if let Some(s) = self.seed {
            raw.set("seed", s);
        }
        match (self.density, density) {
            (Some(d), true) => raw.set("density", d),
            (Some(_), false) => bail!("--density is not used by this command"),
            _ => {}
        }
        match (&self.levels, levels) {
            (Some(l), true) => raw.set("levels", l.clone()),
            (Some(_), false) => bail!("--levels is not used by this command"),
            _ => {}
        }
        Ok(())
    }
}

fn locate(net: &MetricNetwork, at: &hjnet::AmbientPoint, snap: f64) -> Result<NetPoint> {
    net.locate(at, snap).with_context(|| format!("({at}) is not within {snap} of the network"))
}

pub fn build(mut raw: RawConfig, ov: &Overrides, sink: &Sink) -> Result<Option<Verdict>> {
    if ov.density.is_some() {
        bail!("--density is not used by this command");
    }
    if let Some(s) = ov.seed {
        raw.set("seed", s);
    }
    let seed = raw.take_seed()?;
    let base: SpaceDescriptor = raw.parse()?;
    let descriptors = match &ov.levels {
        None => vec![base],
        Some(levels) => {
            if base.level().is_none() {
                bail!("{} has no level to vary", base.kind());
            }
            if sink.is_stdout() && levels.len() > 1 {
                bail!("building several levels needs --out");
            }
            levels.iter().map(|&n| base.with_level(n)).collect()
        }
    };
    for d in descriptors {
        let net = d.build()?.require_network()?.clone();
        let meta = resolved(&d, seed)?;
        let file = NetworkFile::from_network(&net).with_meta(meta);
        let name = match d.level() {
            Some(n) => format!("{}_{n}.json", d.kind()),
            None => format!("{}.json", d.kind()),
        };
        sink.raw(&name, |w| {
            writeln!(w, "{}", file.to_json()?)?;
            Ok(())
        })?;
    }
    Ok(None)
}

pub fn dist(mut raw: RawConfig, ov: &Overrides, sink: &Sink) -> Result<Option<Verdict>> {
    ov.apply(&mut raw, false, false)?;
    let seed = raw.take_seed()?;
    let cfg: DistConfig = raw.parse()?;
    let net = cfg.network.load()?;
    let a = locate(&net, &cfg.from, cfg.snap)?;
    let b = locate(&net, &cfg.to, cfg.snap)?;
    let d = intrinsic_distance(&net, &a, &b)?;
    sink.emit("dist.csv", &resolved(&cfg, seed)?, |w| {
        writeln!(w, "distance")?;
        writeln!(w, "{d}")?;
        Ok(())
    })?;
    Ok(None)
}

pub fn hausdorff(mut raw: RawConfig, ov: &Overrides, sink: &Sink) -> Result<Option<Verdict>> {
    ov.apply(&mut raw, true, true)?;
    let seed = raw.take_seed()?;
    let mut cfg: HausdorffConfig = raw.parse()?;
    let metric = cfg.metric();
    cfg.metric = Some(metric);
    let b = sample(&cfg.b.build()?, cfg.density)?;
    let mut rows = Vec::new();
    match &cfg.levels {
        None => {
            let a = sample(&cfg.a.build()?, cfg.density)?;
            rows.push((cfg.a.level(), hausdorff_distance(&a, &b, metric)?));
        }
        Some(levels) => {
            for &n in levels {
                let d = cfg.a.with_level(n);
                let a = sample(&d.build()?, cfg.density)?;
                rows.push((Some(n), hausdorff_distance(&a, &b, metric)?));
            }
        }
    }
    sink.emit("hausdorff.csv", &resolved(&cfg, seed)?, |w| {
        writeln!(w, "n,hausdorff")?;
        for (n, d) in &rows {
            writeln!(w, "{},{d}", n.map(|n| n.to_string()).unwrap_or_default())?;
        }
        Ok(())
    })?;
    Ok(None)
}

pub fn solve(mut raw: RawConfig, ov: &Overrides, sink: &Sink) -> Result<Option<Verdict>> {
    ov.apply(&mut raw, false, false)?;
    let seed = raw.take_seed()?;
    let cfg: SolveConfig = raw.parse()?;
    let net = cfg.network.load()?;
    let boundary: Vec<(NetPoint, f64)> =
        cfg.boundary.iter().map(|b| Ok((locate(&net, &b.at, cfg.snap)?, b.value))).collect::<Result<_>>()?;

    let field = match &cfg.solver {
        SolverChoice::Eikonal => {
            if cfg.lambda != 0.0 {
                bail!("the eikonal solver needs lambda = 0; use the discounted solver");
            }
            eikonal(&net, &boundary, &cfg)?
        }
        SolverChoice::Discounted { tol, max_sweeps } => {
            let h = HamiltonianSpec::eikonal(cfg.lambda, cfg.forcing.clone());
            let opts = DiscountedOptions { h_solver: cfg.h_solver, tol: *tol, max_sweeps: *max_sweeps };
            let sol = solve_discounted(&net, &h, &boundary, &opts)?;
            eprintln!("sweeps: {}", sol.sweeps);
            sol.field
        }
        SolverChoice::HopfLax { t, speed } => {
            if cfg.lambda != 0.0 {
                bail!("the Hopf-Lax evolution starts from an eikonal solution; use lambda = 0");
            }
            hopf_lax_evolve(&eikonal(&net, &boundary, &cfg)?, *t, *speed)?
        }
    };
    sink.emit("field.csv", &resolved(&cfg, seed)?, |w| Ok(field.write_csv(w)?))?;
    Ok(None)
}

fn eikonal(net: &Arc<MetricNetwork>, boundary: &[(NetPoint, f64)], cfg: &SolveConfig) -> Result<ScalarField> {
    let sol = solve_eikonal(net, boundary, &cfg.forcing, cfg.h_solver)?;
    for (i, j) in &sol.incompatible {
        eprintln!("warning: boundary value {j} is unreachable from boundary point {i}");
    }
    Ok(sol.field)
}

pub fn stability(mut raw: RawConfig, ov: &Overrides, sink: &Sink) -> Result<Option<Verdict>> {
    ov.apply(&mut raw, true, true)?;
    raw.set_default("tolerance", DEFAULT_STABILITY_TOLERANCE);
    // the distance check inherits the one configuration seed
    let nested = raw.get("h2").and_then(|h| h.get("seed")).and_then(Value::as_u64);
    if raw.get("seed").is_none() {
        if let Some(s) = nested {
            raw.set("seed", s);
        }
    }
    let seed = raw.take_seed()?;
    if let Some(Value::Object(h2)) = raw.get_mut("h2") {
        h2.insert("seed".into(), seed.into());
    }
    let exp: StabilityExperiment = raw.parse()?;
    let report = exp.run()?;
    let config = resolved(&exp, seed)?;
    sink.emit("report.csv", &config, |w| Ok(report.write_csv(w)?))?;
    if !sink.is_stdout() {
        sink.emit("plot.dat", &config, |w| Ok(report.write_plot_data(w)?))?;
    }
    for line in report.summary() {
        eprintln!("{line}");
    }
    Ok(Some(report.verdict))
}

pub fn check_h2_cmd(mut raw: RawConfig, ov: &Overrides, sink: &Sink) -> Result<Option<Verdict>> {
    ov.apply(&mut raw, true, true)?;
    let seed = raw.take_seed()?;
    let mut cfg: CheckH2Config = raw.parse()?;
    let metric = *cfg.ambient.get_or_insert(cfg.limit.default_ambient());
    let seq = SpaceSequence::from_descriptors(&cfg.family, &cfg.levels, &cfg.limit, metric)?;
    let opts = H2Options::new(cfg.pairs, seed, cfg.density, cfg.tolerance).with_probes(cfg.probes);
    let report = check_h2(&seq, &opts)?;
    sink.emit("h2.csv", &resolved(&cfg, seed)?, |w| Ok(report.write_csv(w)?))?;
    if let Some((a, b)) = report.witness() {
        eprintln!("witness: ({a}) ({b})");
    }
    eprintln!("verdict: {}", report.verdict);
    Ok(Some(report.verdict))
}

pub fn viscosity(mut raw: RawConfig, ov: &Overrides, sink: &Sink) -> Result<Option<Verdict>> {
    ov.apply(&mut raw, false, false)?;
    let seed = raw.take_seed()?;
    let mut cfg: ViscosityConfig = raw.parse()?;
    let net = cfg.network.load()?;
    let file = File::open(&cfg.field).with_context(|| format!("opening {}", cfg.field.display()))?;
    let u = ScalarField::read_csv(net.clone(), file)?;

    let anchors: Vec<NetPoint> = match &cfg.anchors {
        Some(points) => points.iter().map(|p| locate(&net, p, cfg.snap)).collect::<Result<_>>()?,
        None => (0..net.vertex_count()).map(|v| net.vertex_point(v)).collect(),
    };
    let exclude = cfg.exclude.iter().map(|p| locate(&net, p, cfg.snap)).collect::<Result<_>>()?;
    let radius = *cfg.radius.get_or_insert(2.0 * u.graph().max_gap());
    let opts = ViscosityOptions { radius, tol: cfg.tol, exclude };
    let h = HamiltonianSpec::eikonal(cfg.lambda, cfg.forcing.clone());
    let modes = match cfg.mode {
        Some(m) => vec![m],
        None => vec![Mode::Sub, Mode::Super],
    };
    let mut violations = Vec::new();
    for mode in modes {
        violations.extend(viscosity_check(&u, &h, mode, &anchors, &cfg.k_grid, &opts)?);
    }
    sink.emit("violations.csv", &resolved(&cfg, seed)?, |w| Ok(write_violations_csv(&violations, w)?))?;
    let verdict = if violations.is_empty() { Verdict::Pass } else { Verdict::Fail };
    eprintln!("violations: {}", violations.len());
    eprintln!("verdict: {verdict}");
    Ok(Some(verdict))
}
