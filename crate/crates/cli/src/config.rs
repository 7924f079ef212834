//! Resolved command configurations.
//!
//! A configuration starts as the JSON object in `--config`, is overlaid
//! key by key with `--json` and then with command-line flags, and is
//! finally parsed into one of the structs below. The top-level `seed` key is
//! common to every command and is split off before parsing.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use hjnet::solvers::Forcing;
use hjnet::stability::{BoundaryPoint, SolverChoice};
use hjnet::{AmbientMetric, AmbientPoint, MetricNetwork, Mode, SpaceDescriptor};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// Distance below which an ambient point is taken to lie on a network.
pub const DEFAULT_SNAP: f64 = 1e-9;
/// Random pairs drawn by `check-h2`.
pub const DEFAULT_H2_PAIRS: usize = 200;
/// Largest distance gap `check-h2` accepts at the deepest level.
pub const DEFAULT_H2_TOLERANCE: f64 = 0.05;
/// Largest matched sup-error `stability` accepts at the deepest level.
pub const DEFAULT_STABILITY_TOLERANCE: f64 = 0.05;
/// Allowed sign defect of the Hamiltonian in `viscosity-check`.
pub const DEFAULT_VISCOSITY_TOL: f64 = 1e-9;
/// Test slopes used by `viscosity-check`.
pub const DEFAULT_K_GRID: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 4.0];

fn snap() -> f64 {
    DEFAULT_SNAP
}

fn unit_forcing() -> Forcing {
    Forcing::Constant(1.0)
}

fn h2_pairs() -> usize {
    DEFAULT_H2_PAIRS
}

fn h2_tolerance() -> f64 {
    DEFAULT_H2_TOLERANCE
}

fn viscosity_tol() -> f64 {
    DEFAULT_VISCOSITY_TOL
}

fn k_grid() -> Vec<f64> {
    DEFAULT_K_GRID.to_vec()
}

/// A network given either as a JSON file or as a space descriptor.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NetworkSource {
    File(PathBuf),
    Space(SpaceDescriptor),
}

impl NetworkSource {
    pub fn load(&self) -> Result<Arc<MetricNetwork>> {
        match self {
            NetworkSource::File(path) => Ok(Arc::new(
                MetricNetwork::load(path).with_context(|| format!("loading {}", path.display()))?,
            )),
            NetworkSource::Space(d) => Ok(d.build()?.require_network()?.clone()),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistConfig {
    pub network: NetworkSource,
    pub from: AmbientPoint,
    pub to: AmbientPoint,
    #[serde(default = "snap")]
    pub snap: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HausdorffConfig {
    pub a: SpaceDescriptor,
    pub b: SpaceDescriptor,
    pub density: f64,
    /// Defaults to Manhattan if either space is a lattice or plane.
    #[serde(default)]
    pub metric: Option<AmbientMetric>,
    /// Levels substituted into `a`, one output row each.
    #[serde(default)]
    pub levels: Option<Vec<usize>>,
}

impl HausdorffConfig {
    pub fn metric(&self) -> AmbientMetric {
        self.metric.unwrap_or_else(|| {
            let m = [self.a.default_ambient(), self.b.default_ambient()];
            if m.contains(&AmbientMetric::Manhattan) {
                AmbientMetric::Manhattan
            } else {
                AmbientMetric::Euclidean
            }
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub network: NetworkSource,
    #[serde(default)]
    pub solver: SolverChoice,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default = "unit_forcing")]
    pub forcing: Forcing,
    #[serde(default)]
    pub boundary: Vec<BoundaryPoint>,
    #[serde(default)]
    pub h_solver: Option<f64>,
    #[serde(default = "snap")]
    pub snap: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckH2Config {
    pub family: SpaceDescriptor,
    pub levels: Vec<usize>,
    pub limit: SpaceDescriptor,
    #[serde(default)]
    pub ambient: Option<AmbientMetric>,
    #[serde(default = "h2_pairs")]
    pub pairs: usize,
    #[serde(default)]
    pub probes: usize,
    pub density: f64,
    #[serde(default = "h2_tolerance")]
    pub tolerance: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViscosityConfig {
    pub network: NetworkSource,
    /// Field CSV as written by `solve`.
    pub field: PathBuf,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default = "unit_forcing")]
    pub forcing: Forcing,
    /// Both modes when absent.
    #[serde(default)]
    pub mode: Option<Mode>,
    /// Every network vertex when absent.
    #[serde(default)]
    pub anchors: Option<Vec<AmbientPoint>>,
    #[serde(default = "k_grid")]
    pub k_grid: Vec<f64>,
    /// Twice the largest node gap of the field when absent.
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default = "viscosity_tol")]
    pub tol: f64,
    #[serde(default)]
    pub exclude: Vec<AmbientPoint>,
    #[serde(default = "snap")]
    pub snap: f64,
}

/// Configuration JSON being assembled from file, inline JSON and flags.
#[derive(Clone, Debug, Default)]
pub struct RawConfig {
    map: Map<String, Value>,
}

impl RawConfig {
    pub fn load(file: Option<&Path>, inline: Option<&str>) -> Result<Self> {
        let mut raw = Self::default();
        if let Some(path) = file {
            let text =
                std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            raw.overlay(parse_object(&text).with_context(|| format!("parsing {}", path.display()))?);
        }
        if let Some(text) = inline {
            raw.overlay(parse_object(text).context("parsing --json")?);
        }
        Ok(raw)
    }

    fn overlay(&mut self, other: Map<String, Value>) {
        self.map.extend(other);
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.map.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.map.get(key)
    }

    pub fn get_mut(&mut self, key: &str) -> Option<&mut Value> {
        self.map.get_mut(key)
    }

    pub fn set_default(&mut self, key: &str, value: impl Into<Value>) {
        self.map.entry(key.to_string()).or_insert_with(|| value.into());
    }

    /// Removes the seed key, defaulting to 0.
    pub fn take_seed(&mut self) -> Result<u64> {
        match self.map.remove("seed") {
            None => Ok(0),
            Some(v) => v.as_u64().with_context(|| format!("seed must be a nonnegative integer, got {v}")),
        }
    }

    pub fn parse<T: for<'de> Deserialize<'de>>(self) -> Result<T> {
        Ok(serde_json::from_value(Value::Object(self.map))?)
    }
}

fn parse_object(text: &str) -> Result<Map<String, Value>> {
    match serde_json::from_str(text)? {
        Value::Object(map) => Ok(map),
        other => bail!("expected a JSON object, got {other}"),
    }
}

/// `x,y` as a JSON pair.
pub fn parse_point(text: &str) -> Result<Value> {
    let coords: Vec<f64> = text
        .split(',')
        .map(|c| c.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("point {text:?}"))?;
    if coords.len() != 2 {
        bail!("point {text:?} needs two coordinates");
    }
    Ok(serde_json::json!(coords))
}

/// A JSON object is a descriptor; anything else is a file path.
pub fn parse_source(text: &str) -> Result<Value> {
    if text.trim_start().starts_with('{') {
        Ok(serde_json::from_str(text)?)
    } else {
        Ok(Value::String(text.to_string()))
    }
}

/// Compact JSON of `config` with `seed` added, for output headers.
pub fn resolved<T: Serialize>(config: &T, seed: u64) -> Result<Value> {
    let mut value = serde_json::to_value(config)?;
    match &mut value {
        Value::Object(map) => {
            map.insert("seed".into(), seed.into());
        }
        _ => bail!("configuration did not serialize to an object"),
    }
    Ok(value)
}
