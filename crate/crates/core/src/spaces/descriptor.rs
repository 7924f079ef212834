//! Named space descriptors and the built spaces they produce.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    arc, circle, koch, lattice_lines, sierpinski_network, sierpinski_vertices, vicsek, y_junction,
    y_junction_tube, PlanarDomainMesh,
};
use crate::error::{Error, Result};
use crate::metric::{AmbientMetric, AmbientPoint, MetricNetwork};

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`, serialized as
/// `[x0, y0, x1, y1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Window {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Window {
    pub const fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn is_valid(&self) -> bool {
        [self.x0, self.y0, self.x1, self.y1].iter().all(|v| v.is_finite())
            && self.x0 <= self.x1
            && self.y0 <= self.y1
    }

    pub fn contains(&self, p: &AmbientPoint) -> bool {
        (self.x0..=self.x1).contains(&p.x) && (self.y0..=self.y1).contains(&p.y)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }
}

impl From<[f64; 4]> for Window {
    fn from([x0, y0, x1, y1]: [f64; 4]) -> Self {
        Self::new(x0, y0, x1, y1)
    }
}

impl From<Window> for [f64; 4] {
    fn from(w: Window) -> Self {
        [w.x0, w.y0, w.x1, w.y1]
    }
}

fn default_segments() -> usize {
    256
}

fn default_length() -> f64 {
    1.0
}

/// A space by name, as read from experiment configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceDescriptor {
    Vicsek {
        n: usize,
    },
    Koch {
        n: usize,
    },
    SierpinskiNetwork {
        n: usize,
    },
    SierpinskiVertices {
        n: usize,
    },
    Lattice {
        n: usize,
        window: Window,
    },
    Yjunction {
        #[serde(default = "default_length")]
        length: f64,
    },
    YjunctionTube {
        n: usize,
        #[serde(default = "default_length")]
        arm_length: f64,
        /// Defaults to `1/(8n)`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        h_mesh: Option<f64>,
    },
    /// Circle arc of angular span `2π − 1/n`.
    Arc {
        n: usize,
        #[serde(default = "default_segments")]
        segments: usize,
    },
    Circle {
        #[serde(default = "default_segments")]
        segments: usize,
    },
    /// The plane itself, restricted to a window.
    Plane {
        window: Window,
    },
}

impl SpaceDescriptor {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Vicsek { .. } => "vicsek",
            Self::Koch { .. } => "koch",
            Self::SierpinskiNetwork { .. } => "sierpinski_network",
            Self::SierpinskiVertices { .. } => "sierpinski_vertices",
            Self::Lattice { .. } => "lattice",
            Self::Yjunction { .. } => "yjunction",
            Self::YjunctionTube { .. } => "yjunction_tube",
            Self::Arc { .. } => "arc",
            Self::Circle { .. } => "circle",
            Self::Plane { .. } => "plane",
        }
    }

    /// The level index `n`, for indexed families.
    pub fn level(&self) -> Option<usize> {
        match *self {
            Self::Vicsek { n }
            | Self::Koch { n }
            | Self::SierpinskiNetwork { n }
            | Self::SierpinskiVertices { n }
            | Self::Lattice { n, .. }
            | Self::YjunctionTube { n, .. }
            | Self::Arc { n, .. } => Some(n),
            Self::Yjunction { .. } | Self::Circle { .. } | Self::Plane { .. } => None,
        }
    }

    /// Same family at level `n`; limit spaces are returned unchanged.
    pub fn with_level(&self, level: usize) -> Self {
        let mut out = self.clone();
        match &mut out {
            Self::Vicsek { n }
            | Self::Koch { n }
            | Self::SierpinskiNetwork { n }
            | Self::SierpinskiVertices { n }
            | Self::Lattice { n, .. }
            | Self::YjunctionTube { n, .. }
            | Self::Arc { n, .. } => *n = level,
            Self::Yjunction { .. } | Self::Circle { .. } | Self::Plane { .. } => {}
        }
        out
    }

    /// Number of cells per unit of the family's scale at this level: `2^n`
    /// for Sierpiński, `3^n` for Vicsek and Koch, `n` otherwise.
    pub fn resolution(&self) -> Option<f64> {
        let n = self.level()?;
        Some(match self {
            Self::SierpinskiNetwork { .. } | Self::SierpinskiVertices { .. } => 2f64.powi(n as i32),
            Self::Vicsek { .. } | Self::Koch { .. } => 3f64.powi(n as i32),
            _ => n as f64,
        })
    }

    /// Ambient metric the family is compared in.
    pub fn default_ambient(&self) -> AmbientMetric {
        match self {
            Self::Lattice { .. } | Self::Plane { .. } => AmbientMetric::Manhattan,
            _ => AmbientMetric::Euclidean,
        }
    }

    pub fn build(&self) -> Result<Space> {
        let net = match *self {
            Self::Vicsek { n } => vicsek(n)?,
            Self::Koch { n } => koch(n)?,
            Self::SierpinskiNetwork { n } => sierpinski_network(n)?,
            Self::SierpinskiVertices { n } => sierpinski_vertices(n)?,
            Self::Lattice { n, window } => lattice_lines(n, window)?,
            Self::Yjunction { length } => y_junction(length)?,
            Self::YjunctionTube { n, arm_length, h_mesh } => {
                let h = h_mesh.unwrap_or(1.0 / (8.0 * n.max(1) as f64));
                return Ok(Space::Mesh(Arc::new(y_junction_tube(n, arm_length, h)?)));
            }
            Self::Arc { n, segments } => arc(n, segments)?,
            Self::Circle { segments } => circle(segments)?,
            Self::Plane { window } => {
                if !window.is_valid() || window.width() * window.height() <= 0.0 {
                    return Err(Error::InvalidParameter(format!("empty window {window:?}")));
                }
                return Ok(Space::Plane(window));
            }
        };
        Ok(Space::Network(Arc::new(net)))
    }
}

impl fmt::Display for SpaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.level() {
            Some(n) => write!(f, "{}(n={n})", self.kind()),
            None => f.write_str(self.kind()),
        }
    }
}

/// A built space: a metric network, a meshed planar region (measured
/// through its Steiner graph), or a planar window with the Manhattan metric.
#[derive(Clone, Debug)]
pub enum Space {
    Network(Arc<MetricNetwork>),
    Mesh(Arc<PlanarDomainMesh>),
    Plane(Window),
}

impl Space {
    /// The network that carries the intrinsic metric, if any.
    pub fn network(&self) -> Option<&Arc<MetricNetwork>> {
        match self {
            Space::Network(net) => Some(net),
            Space::Mesh(mesh) => Some(mesh.network()),
            Space::Plane(_) => None,
        }
    }

    pub fn require_network(&self) -> Result<&Arc<MetricNetwork>> {
        self.network().ok_or_else(|| Error::Unsupported("the plane has no network representation".into()))
    }
}
