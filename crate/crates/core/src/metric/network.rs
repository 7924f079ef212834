use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::geometry::AmbientPoint;
use super::shortest::{label_setting, Labels, Link};
use crate::error::{Error, Result};

/// Relative slack allowed when checking that an edge length dominates the
/// chord between its endpoints.
const CHORD_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    /// Intrinsic length. Stored, never recomputed from the geometry.
    pub length: f64,
    /// Drawing polyline from `a` to `b`, endpoints included. A straight
    /// segment when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<Vec<AmbientPoint>>,
}

impl Edge {
    pub fn new(a: usize, b: usize, length: f64) -> Self {
        Self { a, b, length, geometry: None }
    }

    pub fn other(&self, v: usize) -> usize {
        if v == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// A compact geodesic network embedded in the plane.
///
/// Immutable after construction; every constructor validates
/// connectivity, positive lengths, and that edge lengths dominate the
/// ambient chord of their endpoints.
#[derive(Clone, Debug)]
pub struct MetricNetwork {
    vertices: Vec<AmbientPoint>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<Link>>,
}

/// A point on a network: an edge and an arclength offset from its `a` end.
///
/// Points obtained through [`MetricNetwork::point`] are canonical: a vertex
/// is always represented through its lowest-numbered incident edge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetPoint {
    pub edge: usize,
    pub offset: f64,
}

impl MetricNetwork {
    pub fn new(vertices: Vec<AmbientPoint>, edges: Vec<Edge>) -> Result<Self> {
        Self::checked(vertices, edges).map_err(|(_, msg)| Error::InvalidNetwork(msg))
    }

    /// Validating constructor reporting which item failed.
    pub(crate) fn checked(
        vertices: Vec<AmbientPoint>,
        edges: Vec<Edge>,
    ) -> std::result::Result<Self, (Item, String)> {
        if let Some(v) = first_violation(&vertices, &edges) {
            return Err(v);
        }
        let adjacency = build_adjacency(vertices.len(), &edges);
        let net = Self { vertices, edges, adjacency };
        if let Some(v) = net.first_unreachable() {
            return Err((Item::Vertex(v), format!("vertex {v} is not reachable from vertex 0")));
        }
        Ok(net)
    }

    pub fn vertices(&self) -> &[AmbientPoint] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn adjacency(&self) -> &[Vec<Link>] {
        &self.adjacency
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, e: usize) -> Result<&Edge> {
        self.edges.get(e).ok_or(Error::InvalidEdge(e))
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    pub fn min_edge_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).fold(f64::INFINITY, f64::min)
    }

    /// Diagonal of the bounding box of all vertices and geometry.
    pub fn diameter_bound(&self) -> f64 {
        let mut lo = AmbientPoint::new(f64::INFINITY, f64::INFINITY);
        let mut hi = AmbientPoint::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        let pts = self.vertices.iter().chain(self.edges.iter().flat_map(|e| e.geometry.iter().flatten()));
        for p in pts {
            lo = AmbientPoint::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = AmbientPoint::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        lo.euclidean(&hi)
    }

    /// Canonical point for `(edge, offset)`; endpoint offsets collapse to the
    /// vertex representation.
    pub fn point(&self, edge: usize, offset: f64) -> Result<NetPoint> {
        let e = self.edge(edge)?;
        let tol = 1e-12 * e.length;
        if !offset.is_finite() || offset < -tol || offset > e.length + tol {
            return Err(Error::OffsetOutOfRange { edge, offset, length: e.length });
        }
        if offset <= 0.0 {
            Ok(self.vertex_point(e.a))
        } else if offset >= e.length {
            Ok(self.vertex_point(e.b))
        } else {
            Ok(NetPoint { edge, offset })
        }
    }

    /// Canonical representation of vertex `v`.
    pub fn vertex_point(&self, v: usize) -> NetPoint {
        let link = self.adjacency[v]
            .iter()
            .min_by_key(|l| l.edge)
            .expect("connected network vertex has an incident edge");
        let e = &self.edges[link.edge];
        let offset = if e.a == v { 0.0 } else { e.length };
        NetPoint { edge: link.edge, offset }
    }

    /// The vertex a point sits on, if any.
    pub fn as_vertex(&self, p: &NetPoint) -> Option<usize> {
        let e = &self.edges[p.edge];
        if p.offset <= 0.0 {
            Some(e.a)
        } else if p.offset >= e.length {
            Some(e.b)
        } else {
            None
        }
    }

    pub fn validate_point(&self, p: &NetPoint) -> Result<()> {
        self.point(p.edge, p.offset).map(|_| ())
    }

    /// Embedding of a network point: linear interpolation along the edge
    /// geometry at arclength fraction `offset / length`.
    pub fn ambient_position(&self, p: &NetPoint) -> Result<AmbientPoint> {
        self.validate_point(p)?;
        let e = &self.edges[p.edge];
        let t = (p.offset / e.length).clamp(0.0, 1.0);
        Ok(self.edge_position(p.edge, t))
    }

    /// Position at fraction `t ∈ [0, 1]` along edge `edge`.
    pub fn edge_position(&self, edge: usize, t: f64) -> AmbientPoint {
        let e = &self.edges[edge];
        let (pa, pb) = (self.vertices[e.a], self.vertices[e.b]);
        if t <= 0.0 {
            return pa;
        }
        if t >= 1.0 {
            return pb;
        }
        match &e.geometry {
            None => pa.lerp(&pb, t),
            Some(poly) => polyline_position(poly, t),
        }
    }

    /// Locate an ambient point lying on the network within `tol`.
    pub fn locate(&self, q: &AmbientPoint, tol: f64) -> Result<NetPoint> {
        for (v, p) in self.vertices.iter().enumerate() {
            if p.euclidean(q) <= tol {
                return Ok(self.vertex_point(v));
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            let poly = self.polyline(i);
            let total: f64 = poly.windows(2).map(|w| w[0].euclidean(&w[1])).sum();
            let mut run = 0.0;
            for w in poly.windows(2) {
                let seg = w[0].euclidean(&w[1]);
                let d = w[1].sub(&w[0]);
                let t = if seg > 0.0 { (q.sub(&w[0]).dot(&d) / (seg * seg)).clamp(0.0, 1.0) } else { 0.0 };
                if w[0].lerp(&w[1], t).euclidean(q) <= tol {
                    let frac = (run + t * seg) / total;
                    return self.point(i, frac * e.length);
                }
                run += seg;
            }
        }
        Err(Error::PointNotOnNetwork { x: q.x, y: q.y })
    }

    /// Vertex closest to `q` in the Euclidean metric (lowest id on ties).
    pub fn nearest_vertex(&self, q: &AmbientPoint) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (v, p) in self.vertices.iter().enumerate() {
            let d = p.euclidean(q);
            if d < best.0 {
                best = (d, v);
            }
        }
        best.1
    }

    /// Drawing polyline of an edge, endpoints included.
    pub fn polyline(&self, edge: usize) -> Vec<AmbientPoint> {
        let e = &self.edges[edge];
        match &e.geometry {
            Some(poly) => poly.clone(),
            None => vec![self.vertices[e.a], self.vertices[e.b]],
        }
    }

    /// Distances from `source` to every vertex and, through them, to any
    /// other point.
    pub fn distances_from(&self, source: &NetPoint) -> Result<PointDistances<'_>> {
        self.validate_point(source)?;
        let labels = label_setting(&self.adjacency, &self.seeds(source), |l| l.length);
        if !labels.all_reached() {
            return Err(Error::CorruptNetwork("disconnected network".into()));
        }
        Ok(PointDistances { net: self, source: *source, labels })
    }

    /// Seeds for a shortest-path sweep starting at a network point.
    pub(crate) fn seeds(&self, p: &NetPoint) -> Vec<(usize, f64)> {
        let e = &self.edges[p.edge];
        match self.as_vertex(p) {
            Some(v) => vec![(v, 0.0)],
            None => vec![(e.a, p.offset), (e.b, e.length - p.offset)],
        }
    }

    fn first_unreachable(&self) -> Option<usize> {
        let n = self.vertices.len();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for l in &self.adjacency[v] {
                if !seen[l.to] {
                    seen[l.to] = true;
                    queue.push_back(l.to);
                }
            }
        }
        seen.iter().position(|s| !s)
    }
}

/// Distances from a fixed source point.
#[derive(Clone, Debug)]
pub struct PointDistances<'a> {
    net: &'a MetricNetwork,
    source: NetPoint,
    labels: Labels,
}

impl PointDistances<'_> {
    pub fn vertex_distances(&self) -> &[f64] {
        &self.labels.dist
    }

    /// Intrinsic distance from the source to `p`.
    pub fn to(&self, p: &NetPoint) -> f64 {
        let e = &self.net.edges[p.edge];
        let d = &self.labels.dist;
        let mut best = (d[e.a] + p.offset).min(d[e.b] + (e.length - p.offset));
        if self.source.edge == p.edge {
            best = best.min((self.source.offset - p.offset).abs());
        } else if let (Some(u), Some(v)) = (self.net.as_vertex(&self.source), self.net.as_vertex(p)) {
            if u == v {
                best = 0.0;
            }
        }
        best
    }
}

/// Length of the shortest network path between two points.
pub fn intrinsic_distance(net: &MetricNetwork, a: &NetPoint, b: &NetPoint) -> Result<f64> {
    net.validate_point(b)?;
    Ok(net.distances_from(a)?.to(b))
}

fn polyline_position(poly: &[AmbientPoint], t: f64) -> AmbientPoint {
    let total: f64 = poly.windows(2).map(|w| w[0].euclidean(&w[1])).sum();
    let target = t * total;
    let mut run = 0.0;
    for w in poly.windows(2) {
        let seg = w[0].euclidean(&w[1]);
        if run + seg >= target && seg > 0.0 {
            return w[0].lerp(&w[1], (target - run) / seg);
        }
        run += seg;
    }
    *poly.last().expect("polyline has points")
}

pub(crate) fn build_adjacency(n: usize, edges: &[Edge]) -> Vec<Vec<Link>> {
    let mut adjacency = vec![Vec::new(); n];
    for (i, e) in edges.iter().enumerate() {
        adjacency[e.a].push(Link { to: e.b, length: e.length, edge: i });
        adjacency[e.b].push(Link { to: e.a, length: e.length, edge: i });
    }
    adjacency
}

/// Which part of a network an invariant violation refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Item {
    Network,
    Vertex(usize),
    Edge(usize),
}

/// First invariant violation. Shared with the file loader, which maps the
/// item back to a line.
pub(crate) fn first_violation(vertices: &[AmbientPoint], edges: &[Edge]) -> Option<(Item, String)> {
    if vertices.is_empty() {
        return Some((Item::Network, "network has no vertices".into()));
    }
    if edges.is_empty() {
        return Some((Item::Network, "network has no edges".into()));
    }
    for (i, v) in vertices.iter().enumerate() {
        if !v.is_finite() {
            return Some((Item::Vertex(i), format!("vertex {i} has non-finite coordinates")));
        }
    }
    let n = vertices.len();
    for (i, e) in edges.iter().enumerate() {
        if e.a >= n || e.b >= n {
            return Some((Item::Edge(i), format!("edge {i} references a missing vertex")));
        }
        if e.a == e.b {
            return Some((Item::Edge(i), format!("edge {i} is a loop")));
        }
        if !(e.length.is_finite() && e.length > 0.0) {
            return Some((Item::Edge(i), format!("edge {i} has non-positive length {}", e.length)));
        }
        let chord = vertices[e.a].euclidean(&vertices[e.b]);
        if e.length < chord * (1.0 - CHORD_SLACK) {
            return Some((
                Item::Edge(i),
                format!("edge {i} length {} is shorter than its chord {chord}", e.length),
            ));
        }
        if let Some(poly) = &e.geometry {
            if poly.len() < 2 || poly.iter().any(|p| !p.is_finite()) {
                return Some((Item::Edge(i), format!("edge {i} has an invalid geometry polyline")));
            }
            let tol = 1e-9 * chord.max(e.length);
            if poly[0].euclidean(&vertices[e.a]) > tol || poly[poly.len() - 1].euclidean(&vertices[e.b]) > tol
            {
                return Some((Item::Edge(i), format!("edge {i} geometry does not join its endpoints")));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn unit_segment() -> MetricNetwork {
        MetricNetwork::new(
            vec![AmbientPoint::new(0.0, 0.0), AmbientPoint::new(1.0, 0.0)],
            vec![Edge::new(0, 1, 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn ambient_position_interpolates() {
        let net = unit_segment();
        let p = net.point(0, 0.25).unwrap();
        assert_eq!(net.ambient_position(&p).unwrap(), AmbientPoint::new(0.25, 0.0));
        let a = net.point(0, 0.0).unwrap();
        assert_eq!(net.ambient_position(&a).unwrap(), AmbientPoint::new(0.0, 0.0));
        let b = net.point(0, 1.0).unwrap();
        assert_eq!(net.ambient_position(&b).unwrap(), AmbientPoint::new(1.0, 0.0));
    }

    #[test]
    fn ambient_position_errors() {
        let net = unit_segment();
        assert!(matches!(
            net.ambient_position(&NetPoint { edge: 3, offset: 0.0 }),
            Err(Error::InvalidEdge(3))
        ));
        assert!(matches!(
            net.ambient_position(&NetPoint { edge: 0, offset: 1.5 }),
            Err(Error::OffsetOutOfRange { .. })
        ));
    }

    #[test]
    fn polyline_geometry_is_followed() {
        let mut e = Edge::new(0, 1, 2.0);
        e.geometry =
            Some(vec![AmbientPoint::new(0.0, 0.0), AmbientPoint::new(0.0, 1.0), AmbientPoint::new(1.0, 1.0)]);
        let net = MetricNetwork::new(vec![AmbientPoint::new(0.0, 0.0), AmbientPoint::new(1.0, 1.0)], vec![e])
            .unwrap();
        let p = net.ambient_position(&NetPoint { edge: 0, offset: 1.5 }).unwrap();
        assert!(p.euclidean(&AmbientPoint::new(0.5, 1.0)) < 1e-15);
    }

    #[test]
    fn endpoints_canonicalize() {
        let net = MetricNetwork::new(
            vec![AmbientPoint::new(0.0, 0.0), AmbientPoint::new(1.0, 0.0), AmbientPoint::new(2.0, 0.0)],
            vec![Edge::new(0, 1, 1.0), Edge::new(1, 2, 1.0)],
        )
        .unwrap();
        assert_eq!(net.point(1, 0.0).unwrap(), net.point(0, 1.0).unwrap());
        assert_eq!(net.point(1, 0.0).unwrap(), NetPoint { edge: 0, offset: 1.0 });
        assert_eq!(net.as_vertex(&net.point(1, 1.0).unwrap()), Some(2));
    }

    #[test]
    fn distances_on_single_edge() {
        let net = unit_segment();
        let a = net.point(0, 0.2).unwrap();
        assert_eq!(intrinsic_distance(&net, &a, &a).unwrap(), 0.0);
        let (u, v) = (net.vertex_point(0), net.vertex_point(1));
        assert_eq!(intrinsic_distance(&net, &u, &v).unwrap(), 1.0);
        let b = net.point(0, 0.7).unwrap();
        assert!((intrinsic_distance(&net, &a, &b).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid_networks() {
        let pts = vec![AmbientPoint::new(0.0, 0.0), AmbientPoint::new(1.0, 0.0)];
        assert!(MetricNetwork::new(pts.clone(), vec![Edge::new(0, 1, 0.5)]).is_err());
        assert!(MetricNetwork::new(pts.clone(), vec![Edge::new(0, 1, -1.0)]).is_err());
        assert!(MetricNetwork::new(pts.clone(), vec![Edge::new(0, 2, 1.0)]).is_err());
        let three = vec![pts[0], pts[1], AmbientPoint::new(5.0, 5.0)];
        let err = MetricNetwork::new(three, vec![Edge::new(0, 1, 1.0)]).unwrap_err();
        assert!(err.to_string().contains("not reachable"));
    }

    #[test]
    fn locate_finds_interior_points() {
        let net = unit_segment();
        let p = net.locate(&AmbientPoint::new(0.4, 0.0), 1e-12).unwrap();
        assert!((p.offset - 0.4).abs() < 1e-15);
        assert!(net.locate(&AmbientPoint::new(0.4, 0.1), 1e-12).is_err());
    }
}
