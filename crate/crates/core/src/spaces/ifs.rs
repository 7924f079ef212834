//! Iterated function systems of plane similarities and their prefractals.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::metric::{AmbientPoint, Edge, MetricNetwork};

/// Relative tolerance used to decide whether a linear part is a similarity.
const SIMILARITY_TOL: f64 = 1e-12;

/// Weld tolerance as a fraction of the seed diameter.
pub const WELD_FRACTION: f64 = 1e-9;

/// Deepest supported iteration.
pub const MAX_DEPTH: usize = 12;

/// Largest edge count any constructor will produce.
pub const MAX_EDGES: usize = 1 << 22;

/// `x ↦ linear · x + translation`, with `linear` stored row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineMap {
    pub linear: [[f64; 2]; 2],
    pub translation: [f64; 2],
}

impl AffineMap {
    pub const fn new(linear: [[f64; 2]; 2], translation: [f64; 2]) -> Self {
        Self { linear, translation }
    }

    /// `x ↦ ratio · x + translation`.
    pub const fn scaling(ratio: f64, translation: [f64; 2]) -> Self {
        Self::new([[ratio, 0.0], [0.0, ratio]], translation)
    }

    pub fn apply(&self, p: &AmbientPoint) -> AmbientPoint {
        let [[a, b], [c, d]] = self.linear;
        AmbientPoint::new(a * p.x + b * p.y + self.translation[0], c * p.x + d * p.y + self.translation[1])
    }

    /// Largest singular value of the linear part.
    pub fn operator_norm(&self) -> f64 {
        let [[a, b], [c, d]] = self.linear;
        let s = a * a + b * b + c * c + d * d;
        let det = a * d - b * c;
        ((s + (s * s - 4.0 * det * det).max(0.0).sqrt()) / 2.0).sqrt()
    }

    /// Scale factor when the linear part is a rotation or reflection times a
    /// scalar.
    pub fn similarity_ratio(&self) -> Option<f64> {
        let [[a, b], [c, d]] = self.linear;
        let n1 = a.hypot(c);
        let n2 = b.hypot(d);
        let scale = n1.max(n2);
        let orthogonal = (a * b + c * d).abs() <= SIMILARITY_TOL * n1 * n2;
        let equal = (n1 - n2).abs() <= SIMILARITY_TOL * scale;
        (scale > 0.0 && orthogonal && equal).then_some(0.5 * (n1 + n2))
    }
}

/// A nonempty family of contracting similarities.
#[derive(Clone, Debug)]
pub struct IfsSystem {
    maps: Vec<AffineMap>,
    ratios: Vec<f64>,
}

impl IfsSystem {
    pub fn new(maps: Vec<AffineMap>) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::InvalidParameter("empty function system".into()));
        }
        let mut ratios = Vec::with_capacity(maps.len());
        for (i, m) in maps.iter().enumerate() {
            if m.operator_norm() >= 1.0 {
                return Err(Error::NotContraction(i));
            }
            ratios.push(m.similarity_ratio().ok_or(Error::NotSimilarity(i))?);
        }
        Ok(Self { maps, ratios })
    }

    pub fn maps(&self) -> &[AffineMap] {
        &self.maps
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }
}

/// Apply the Hutchinson operator `n` times to `seed`. Edge lengths are
/// multiplied by the similarity ratio; vertices closer than the weld
/// tolerance (a fixed fraction of the seed diameter) are merged.
pub fn ifs_prefractal(ifs: &IfsSystem, seed: &MetricNetwork, n: usize) -> Result<MetricNetwork> {
    check_budget("prefractal", n, seed.edge_count(), ifs.maps.len())?;
    let tolerance = WELD_FRACTION * seed.diameter_bound();
    let mut current = seed.clone();
    for _ in 0..n {
        let mut b = NetworkBuilder::new(tolerance);
        for (map, ratio) in ifs.maps.iter().zip(&ifs.ratios) {
            for e in current.edges() {
                let va = b.add_vertex(map.apply(&current.vertices()[e.a]));
                let vb = b.add_vertex(map.apply(&current.vertices()[e.b]));
                let geometry = e.geometry.as_ref().map(|poly| poly.iter().map(|p| map.apply(p)).collect());
                b.add_edge(va, vb, e.length * ratio, geometry)?;
            }
        }
        current = b.finish()?;
    }
    Ok(current)
}

pub(crate) fn check_budget(kind: &'static str, n: usize, seed_edges: usize, branching: usize) -> Result<()> {
    let too_deep = || Error::UnsupportedDepth { kind, n, max: max_depth(seed_edges, branching) };
    if n > MAX_DEPTH {
        return Err(too_deep());
    }
    let mut edges = seed_edges;
    for _ in 0..n {
        edges = edges.saturating_mul(branching);
        if edges > MAX_EDGES {
            return Err(too_deep());
        }
    }
    Ok(())
}

fn max_depth(seed_edges: usize, branching: usize) -> usize {
    let mut edges = seed_edges;
    let mut n = 0;
    while n < MAX_DEPTH && edges.saturating_mul(branching) <= MAX_EDGES && branching > 1 {
        edges *= branching;
        n += 1;
    }
    n
}

/// Incremental network construction with vertex welding.
pub(crate) struct NetworkBuilder {
    tolerance: f64,
    cells: HashMap<(i64, i64), Vec<usize>>,
    vertices: Vec<AmbientPoint>,
    edges: Vec<Edge>,
    by_endpoints: HashMap<(usize, usize), Vec<usize>>,
}

impl NetworkBuilder {
    pub(crate) fn new(tolerance: f64) -> Self {
        Self {
            tolerance,
            cells: HashMap::new(),
            vertices: Vec::new(),
            edges: Vec::new(),
            by_endpoints: HashMap::new(),
        }
    }

    fn cell(&self, p: &AmbientPoint) -> (i64, i64) {
        ((p.x / self.tolerance).floor() as i64, (p.y / self.tolerance).floor() as i64)
    }

    /// Id of an existing vertex within the tolerance, else a new one.
    pub(crate) fn add_vertex(&mut self, p: AmbientPoint) -> usize {
        let (cx, cy) = self.cell(&p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.cells.get(&(cx + dx, cy + dy)) {
                    for &id in ids {
                        if self.vertices[id].euclidean(&p) <= self.tolerance {
                            return id;
                        }
                    }
                }
            }
        }
        let id = self.vertices.len();
        self.vertices.push(p);
        self.cells.entry((cx, cy)).or_default().push(id);
        id
    }

    pub(crate) fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub(crate) fn vertex(&self, i: usize) -> AmbientPoint {
        self.vertices[i]
    }

    /// Add an edge unless an identical one (same endpoints and length) is
    /// already present.
    pub(crate) fn add_edge(
        &mut self,
        a: usize,
        b: usize,
        length: f64,
        geometry: Option<Vec<AmbientPoint>>,
    ) -> Result<()> {
        if a == b {
            return Err(Error::WeldCollapse { tolerance: self.tolerance });
        }
        let key = (a.min(b), a.max(b));
        let existing = self.by_endpoints.entry(key).or_default();
        let duplicate = existing.iter().any(|&i| (self.edges[i].length - length).abs() <= 1e-12 * length);
        if !duplicate {
            existing.push(self.edges.len());
            self.edges.push(Edge { a, b, length, geometry });
        }
        Ok(())
    }

    pub(crate) fn finish(self) -> Result<MetricNetwork> {
        MetricNetwork::new(self.vertices, self.edges)
    }
}
