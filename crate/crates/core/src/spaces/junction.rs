//! The Y-junction and the shrinking tubes around it.
//!
//! A tube `T_n` is the union of three rectangles of half-width `1/n` along
//! the arms and the equilateral centre triangle joining their inner ends.
//! Its intrinsic metric is approximated by a Steiner graph: the region is
//! triangulated into cells about `1/n` across, every triangle side carries
//! nodes at spacing at most `h_mesh`, and within each triangle every pair of
//! nodes not on a common side is joined by a straight edge.
//!
//! Graph distance never undercuts the planar distance (all edges are
//! straight segments inside the region). A straight segment of length `ℓ`
//! crossing `k` triangle sides is shadowed by a graph path of length at most
//! `ℓ + k·h_mesh`; along an arm `k ≤ 3nℓ + 3`, which gives the stretch bound
//! `1 + C·h_mesh/width` with `C = 9` for node pairs at least one tube width
//! (`2/n`) apart.

use std::collections::HashMap;
use std::sync::Arc;

use super::ifs::NetworkBuilder;
use crate::error::{Error, Result};
use crate::metric::{AmbientPoint, Edge, MetricNetwork};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Stretch constant for [`PlanarDomainMesh`]: graph distance between nodes
/// at least one tube width apart along an arm is at most
/// `(1 + STRETCH_CONSTANT · h_mesh / width)` times their Euclidean distance.
pub const STRETCH_CONSTANT: f64 = 9.0;

/// Arm directions `e_1, e_2, e_3`.
pub const JUNCTION_DIRECTIONS: [AmbientPoint; 3] = [
    AmbientPoint::new(1.0, 0.0),
    AmbientPoint::new(-0.5, SQRT3 / 2.0),
    AmbientPoint::new(-0.5, -SQRT3 / 2.0),
];

/// Unit normals `y_i` to the arms.
const JUNCTION_NORMALS: [AmbientPoint; 3] = [
    AmbientPoint::new(0.0, 1.0),
    AmbientPoint::new(-SQRT3 / 2.0, -0.5),
    AmbientPoint::new(SQRT3 / 2.0, -0.5),
];

/// Three straight arms of the given length from the origin (vertex 0).
pub fn y_junction(length: f64) -> Result<MetricNetwork> {
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::InvalidParameter(format!("arm length {length}")));
    }
    let mut vertices = vec![AmbientPoint::ORIGIN];
    vertices.extend(JUNCTION_DIRECTIONS.iter().map(|e| e.scale(length)));
    let edges = (1..=3).map(|i| Edge::new(0, i, length)).collect();
    MetricNetwork::new(vertices, edges)
}

/// Triangulated tube region with its derived Steiner graph.
#[derive(Clone, Debug)]
pub struct PlanarDomainMesh {
    pub n: usize,
    pub arm_length: f64,
    pub h_mesh: f64,
    vertices: Vec<AmbientPoint>,
    triangles: Vec<[usize; 3]>,
    graph: Arc<MetricNetwork>,
}

impl PlanarDomainMesh {
    /// Triangulation vertices (a prefix of the graph's vertices).
    pub fn mesh_vertices(&self) -> &[AmbientPoint] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// The Steiner graph as a metric network.
    pub fn network(&self) -> &Arc<MetricNetwork> {
        &self.graph
    }

    pub fn half_width(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Whether `p` lies in the tube region (within `tol`).
    pub fn contains(&self, p: &AmbientPoint, tol: f64) -> bool {
        self.triangles.iter().any(|t| {
            let [a, b, c] = t.map(|i| self.vertices[i]);
            let cross = |u: &AmbientPoint, v: &AmbientPoint, w: &AmbientPoint| {
                let (d1, d2) = (v.sub(u), w.sub(u));
                (d1.x * d2.y - d1.y * d2.x) / d1.euclidean(&AmbientPoint::ORIGIN)
            };
            let orient = cross(&a, &b, &c).signum();
            [cross(&a, &b, p), cross(&b, &c, p), cross(&c, &a, p)].iter().all(|s| s * orient >= -tol)
        })
    }
}

/// Tube `T_n` around the Y-junction with arms truncated at `arm_length`,
/// meshed with Steiner spacing `h_mesh ≤ 1/(2n)`.
pub fn y_junction_tube(n: usize, arm_length: f64, h_mesh: f64) -> Result<PlanarDomainMesh> {
    if n == 0 {
        return Err(Error::InvalidParameter("tube index n must be ≥ 1".into()));
    }
    let half = 1.0 / n as f64;
    let inner = SQRT3 / (3.0 * n as f64);
    if !(arm_length.is_finite() && arm_length > inner) {
        return Err(Error::InvalidParameter(format!(
            "arm length {arm_length} must exceed the centre radius {inner}"
        )));
    }
    if !(h_mesh.is_finite() && h_mesh > 0.0) || h_mesh > 0.5 * half * (1.0 + 1e-12) {
        return Err(Error::MeshTooCoarse { h_mesh, half_width: half });
    }

    let mut b = NetworkBuilder::new(1e-9 * half);
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    let origin = b.add_vertex(AmbientPoint::ORIGIN);
    let cells = ((arm_length - inner) / half - 1e-9).ceil().max(1.0) as usize;

    for (e, y) in JUNCTION_DIRECTIONS.iter().zip(&JUNCTION_NORMALS) {
        let node = |s: f64, t: f64| e.scale(s).add(&y.scale(t));
        // grid nodes: columns along the arm, rows t = -1/n, 0, 1/n
        let mut grid = Vec::with_capacity(cells + 1);
        for k in 0..=cells {
            let s = inner + (arm_length - inner) * k as f64 / cells as f64;
            grid.push([-half, 0.0, half].map(|t| b.add_vertex(node(s, t))));
        }
        // centre fan: origin to the inner end of this arm
        triangles.push([origin, grid[0][0], grid[0][1]]);
        triangles.push([origin, grid[0][1], grid[0][2]]);
        for k in 0..cells {
            for r in 0..2 {
                let (p, q) = (grid[k][r], grid[k][r + 1]);
                let (p2, q2) = (grid[k + 1][r], grid[k + 1][r + 1]);
                triangles.push([p, p2, q2]);
                triangles.push([p, q2, q]);
            }
        }
    }
    let mesh_vertex_count = b.vertex_count();
    let vertices: Vec<AmbientPoint> = (0..mesh_vertex_count).map(|i| b.vertex(i)).collect();

    // Steiner nodes on every triangle side, shared between neighbours.
    let mut side_nodes: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    let mut sides: Vec<(usize, usize)> = Vec::new();
    for t in &triangles {
        for (i, j) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            let key = (i.min(j), i.max(j));
            if side_nodes.contains_key(&key) {
                continue;
            }
            let (pa, pb) = (vertices[key.0], vertices[key.1]);
            let pieces = (pa.euclidean(&pb) / h_mesh - 1e-9).ceil().max(1.0) as usize;
            let mut chain = vec![key.0];
            for k in 1..pieces {
                chain.push(b.add_vertex(pa.lerp(&pb, k as f64 / pieces as f64)));
            }
            chain.push(key.1);
            side_nodes.insert(key, chain);
            sides.push(key);
        }
    }
    for key in &sides {
        let chain = &side_nodes[key];
        for w in chain.windows(2) {
            let len = b.vertex(w[0]).euclidean(&b.vertex(w[1]));
            b.add_edge(w[0], w[1], len, None)?;
        }
    }
    for t in &triangles {
        let side_lists: Vec<&Vec<usize>> = [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])]
            .iter()
            .map(|&(i, j)| &side_nodes[&(i.min(j), i.max(j))])
            .collect();
        for (si, first) in side_lists.iter().enumerate() {
            for second in side_lists.iter().skip(si + 1) {
                for &p in first.iter() {
                    for &q in second.iter() {
                        if p == q || share_side(&side_lists, p, q) {
                            continue;
                        }
                        let len = b.vertex(p).euclidean(&b.vertex(q));
                        b.add_edge(p, q, len, None)?;
                    }
                }
            }
        }
    }
    let graph = Arc::new(b.finish()?);
    Ok(PlanarDomainMesh { n, arm_length, h_mesh, vertices, triangles, graph })
}

fn share_side(sides: &[&Vec<usize>], p: usize, q: usize) -> bool {
    sides.iter().any(|s| s.contains(&p) && s.contains(&q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::intrinsic_distance;

    #[test]
    fn junction_distances() {
        let j = y_junction(2.0).unwrap();
        let tip = |i: usize| j.vertex_point(i);
        assert_eq!(intrinsic_distance(&j, &tip(1), &tip(2)).unwrap(), 4.0);
        assert_eq!(intrinsic_distance(&j, &tip(0), &tip(3)).unwrap(), 2.0);
        let a = j.point(0, 0.5).unwrap();
        let b = j.point(1, 0.5).unwrap();
        assert_eq!(intrinsic_distance(&j, &a, &b).unwrap(), 1.0);
    }

    #[test]
    fn tube_corners_match_the_centre_triangle() {
        let n = 3;
        let tube = y_junction_tube(n, 1.0, 1.0 / 24.0).unwrap();
        let r = 2.0 * SQRT3 / (3.0 * n as f64);
        // u_1 = -r e_3, u_2 = -r e_1, u_3 = -r e_2
        for e in JUNCTION_DIRECTIONS {
            let u = e.scale(-r);
            assert!(tube.mesh_vertices().iter().any(|p| p.euclidean(&u) < 1e-12));
        }
        assert_eq!(tube.triangles().len(), 3 * (2 + 4 * 3));
    }

    #[test]
    fn mesh_vertices_stay_within_half_width_of_the_junction() {
        for n in [1, 2, 5] {
            let tube = y_junction_tube(n, 1.5, 0.5 / n as f64).unwrap();
            let half = 1.0 / n as f64;
            for p in tube.network().vertices() {
                let d = JUNCTION_DIRECTIONS
                    .iter()
                    .map(|e| p.euclidean(&e.scale(p.dot(e).max(0.0))))
                    .fold(f64::INFINITY, f64::min);
                assert!(d <= half * (1.0 + 1e-12), "n = {n}: {p:?} at {d}");
            }
        }
    }

    #[test]
    fn graph_dominates_euclidean() {
        let tube = y_junction_tube(2, 1.0, 0.125).unwrap();
        let net = tube.network();
        for k in (0..net.vertex_count()).step_by(17) {
            let src = net.vertex_point(k);
            let dist = net.distances_from(&src).unwrap();
            for (v, p) in net.vertices().iter().enumerate() {
                let d = dist.vertex_distances()[v];
                assert!(d >= p.euclidean(&net.vertices()[k]) * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn contains_the_junction_axis() {
        let tube = y_junction_tube(4, 1.0, 1.0 / 32.0).unwrap();
        for e in JUNCTION_DIRECTIONS {
            for k in 0..=10 {
                assert!(tube.contains(&e.scale(k as f64 / 10.0), 1e-12));
            }
        }
        assert!(!tube.contains(&AmbientPoint::new(0.5, 0.3), 1e-12));
    }

    #[test]
    fn stretch_along_an_arm_is_bounded() {
        let (n, h) = (4usize, 1.0 / 16.0);
        let tube = y_junction_tube(n, 2.0, h).unwrap();
        let net = tube.network();
        let width = 2.0 / n as f64;
        let mut worst: f64 = 1.0;
        let inside = |p: &AmbientPoint| p.x >= 0.5 && p.y.abs() <= 1.0 / n as f64;
        let sources: Vec<usize> =
            (0..net.vertex_count()).filter(|&v| inside(&net.vertices()[v])).step_by(7).collect();
        for &s in &sources {
            let dist = net.distances_from(&net.vertex_point(s)).unwrap();
            for (v, p) in net.vertices().iter().enumerate() {
                let e = p.euclidean(&net.vertices()[s]);
                if inside(p) && e >= width {
                    worst = worst.max(dist.vertex_distances()[v] / e);
                }
            }
        }
        assert!(worst <= 1.0 + STRETCH_CONSTANT * h / width, "stretch {worst}");
    }

    #[test]
    fn crossing_the_junction_approaches_two() {
        let j = 2.0;
        for (n, h) in [(2usize, 1.0 / 16.0), (8, 1.0 / 64.0)] {
            let tube = y_junction_tube(n, 1.5, h).unwrap();
            let net = tube.network();
            let a = net.locate(&JUNCTION_DIRECTIONS[0], 1e-9).unwrap();
            let b = net.locate(&JUNCTION_DIRECTIONS[1], 1e-9).unwrap();
            let d = intrinsic_distance(net, &a, &b).unwrap();
            assert!((d - j).abs() <= 2.0 / n as f64 + 2.0 * h, "n = {n}: {d}");
            assert!(d <= j + 1e-12);
        }
    }

    #[test]
    fn rejects_coarse_meshes() {
        assert!(matches!(y_junction_tube(2, 1.0, 0.3), Err(Error::MeshTooCoarse { .. })));
        assert!(y_junction_tube(2, 1.0, 0.25).is_ok());
    }
}
