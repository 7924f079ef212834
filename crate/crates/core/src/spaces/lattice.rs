use std::collections::HashMap;

use super::descriptor::Window;
use crate::error::{Error, Result};
use crate::metric::{AmbientPoint, Edge, MetricNetwork};

/// Integer indices `k` with `lo ≤ k / n ≤ hi`.
fn lattice_range(lo: f64, hi: f64, n: usize) -> std::ops::RangeInclusive<i64> {
    let n = n as f64;
    let first = (lo * n - 1e-9).ceil() as i64;
    let last = (hi * n + 1e-9).floor() as i64;
    first..=last
}

/// A stop along one lattice line: either a lattice index or a window edge.
#[derive(Clone, Copy)]
enum Stop {
    Lattice(i64),
    Boundary(f64),
}

impl Stop {
    fn coord(&self, n: usize) -> f64 {
        match *self {
            Stop::Lattice(k) => k as f64 / n as f64,
            Stop::Boundary(c) => c,
        }
    }
}

fn stops(lo: f64, hi: f64, n: usize) -> Vec<Stop> {
    let range = lattice_range(lo, hi, n);
    let mut out = Vec::new();
    let first = *range.start();
    if (first as f64 / n as f64 - lo).abs() > 1e-12 {
        out.push(Stop::Boundary(lo));
    }
    out.extend(range.clone().map(Stop::Lattice));
    let last = *range.end();
    if last < first || (last as f64 / n as f64 - hi).abs() > 1e-12 {
        out.push(Stop::Boundary(hi));
    }
    out
}

fn gap(a: Stop, b: Stop, n: usize) -> f64 {
    match (a, b) {
        (Stop::Lattice(i), Stop::Lattice(j)) => (j - i) as f64 / n as f64,
        _ => b.coord(n) - a.coord(n),
    }
}

/// The lines `x = i/n` and `y = j/n` clipped to `window`, welded at their
/// crossings.
pub fn lattice_lines(n: usize, window: Window) -> Result<MetricNetwork> {
    if n == 0 {
        return Err(Error::InvalidParameter("lattice spacing index n must be ≥ 1".into()));
    }
    if !window.is_valid() {
        return Err(Error::InvalidParameter(format!("empty window {window:?}")));
    }
    let cols: Vec<i64> = lattice_range(window.x0, window.x1, n).collect();
    let rows: Vec<i64> = lattice_range(window.y0, window.y1, n).collect();
    if cols.is_empty() && rows.is_empty() {
        return Err(Error::EmptySpace("no lattice line meets the window".into()));
    }
    if (cols.is_empty() && rows.len() > 1) || (rows.is_empty() && cols.len() > 1) {
        return Err(Error::InvalidParameter(
            "window too thin: lattice lines inside it are disconnected".into(),
        ));
    }

    let mut ids: HashMap<(u64, u64), usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut vertex = |p: AmbientPoint, vertices: &mut Vec<AmbientPoint>| -> usize {
        *ids.entry((p.x.to_bits(), p.y.to_bits())).or_insert_with(|| {
            vertices.push(p);
            vertices.len() - 1
        })
    };
    let mut edges = Vec::new();

    let ys = stops(window.y0, window.y1, n);
    for &i in &cols {
        let x = i as f64 / n as f64;
        for w in ys.windows(2) {
            let a = vertex(AmbientPoint::new(x, w[0].coord(n)), &mut vertices);
            let b = vertex(AmbientPoint::new(x, w[1].coord(n)), &mut vertices);
            edges.push(Edge::new(a, b, gap(w[0], w[1], n)));
        }
    }
    let xs = stops(window.x0, window.x1, n);
    for &j in &rows {
        let y = j as f64 / n as f64;
        for w in xs.windows(2) {
            let a = vertex(AmbientPoint::new(w[0].coord(n), y), &mut vertices);
            let b = vertex(AmbientPoint::new(w[1].coord(n), y), &mut vertices);
            edges.push(Edge::new(a, b, gap(w[0], w[1], n)));
        }
    }
    MetricNetwork::new(vertices, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::intrinsic_distance;

    fn dist(net: &MetricNetwork, a: AmbientPoint, b: AmbientPoint) -> f64 {
        let pa = net.locate(&a, 1e-12).unwrap();
        let pb = net.locate(&b, 1e-12).unwrap();
        intrinsic_distance(net, &pa, &pb).unwrap()
    }

    #[test]
    fn corner_to_corner_is_manhattan() {
        let net = lattice_lines(1, Window::new(0.0, 0.0, 2.0, 2.0)).unwrap();
        assert_eq!(dist(&net, AmbientPoint::new(0.0, 0.0), AmbientPoint::new(2.0, 2.0)), 4.0);
    }

    #[test]
    fn off_lattice_pair_detours() {
        // routes via y = 0 (1.7), y = 1 (2.3) or y = 2 (longer): minimum 1.7
        let net = lattice_lines(1, Window::new(0.0, 0.0, 2.0, 2.0)).unwrap();
        let d = dist(&net, AmbientPoint::new(0.0, 0.3), AmbientPoint::new(1.0, 0.4));
        assert!((d - 1.7).abs() < 1e-12, "{d}");
    }

    #[test]
    fn unit_window_at_n_two() {
        let net = lattice_lines(2, Window::new(0.0, 0.0, 1.0, 1.0)).unwrap();
        assert_eq!(net.vertex_count(), 9);
        assert_eq!(net.edge_count(), 12);
        assert!(net.edges().iter().all(|e| e.length == 0.5));
    }

    #[test]
    fn clipped_window_has_boundary_stubs() {
        let net = lattice_lines(1, Window::new(-0.5, -0.25, 1.5, 1.0)).unwrap();
        // lines x = 0, 1 and y = 0, 1
        assert_eq!(net.total_length(), 2.0 * 1.25 + 2.0 * 2.0);
        assert!(net.vertices().contains(&AmbientPoint::new(0.0, -0.25)));
        assert!(net.vertices().contains(&AmbientPoint::new(-0.5, 1.0)));
    }

    #[test]
    fn thin_windows() {
        // one row crossing four short columns
        let one = lattice_lines(1, Window::new(0.0, 0.5, 3.0, 1.5)).unwrap();
        assert_eq!(one.total_length(), 3.0 + 4.0);
        let slab = Window::new(0.2, 0.0, 0.8, 2.0);
        assert!(lattice_lines(1, slab).is_err());
        assert!(lattice_lines(1, Window::new(0.2, 0.2, 0.8, 0.8)).is_err());
    }
}
