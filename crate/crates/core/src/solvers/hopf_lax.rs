use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::metric::{ScalarField, State};

/// `u(t, x) = min { u0(y) : d(x, y) ≤ speed · t }`, the solution of
/// `∂_t u + speed·|∇u| = 0`, with the minimum taken over nodes.
///
/// Nodes are visited as sources in increasing order of `u0`; each source
/// floods its ball and claims the nodes not yet claimed. A flood stops at a
/// node that an earlier (smaller) source already reached with at least as
/// much radius to spare, since everything beyond is covered too.
pub fn hopf_lax_evolve(u0: &ScalarField, t: f64, speed: f64) -> Result<ScalarField> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParameter(format!("time {t}")));
    }
    if !(speed.is_finite() && speed > 0.0) {
        return Err(Error::InvalidParameter(format!("speed {speed}")));
    }
    if t == 0.0 {
        return Ok(u0.clone());
    }
    let radius = speed * t;
    let graph = u0.graph();
    let adjacency = graph.adjacency();
    let values = u0.values();
    let n = values.len();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));

    let mut out = vec![f64::NAN; n];
    let mut spare = vec![f64::NEG_INFINITY; n];
    let mut reached = vec![f64::INFINITY; n];
    let mut touched = Vec::new();
    let mut heap = BinaryHeap::new();
    for &source in &order {
        if spare[source] >= radius {
            continue;
        }
        heap.push(State { cost: 0.0, node: source });
        reached[source] = 0.0;
        touched.push(source);
        while let Some(State { cost, node }) = heap.pop() {
            if cost > reached[node] {
                continue;
            }
            let left = radius - cost;
            if left <= spare[node] {
                continue;
            }
            spare[node] = left;
            if out[node].is_nan() {
                out[node] = values[source];
            }
            for link in &adjacency[node] {
                let next = cost + link.length;
                if next <= radius && next < reached[link.to] {
                    reached[link.to] = next;
                    touched.push(link.to);
                    heap.push(State { cost: next, node: link.to });
                }
            }
        }
        for v in touched.drain(..) {
            reached[v] = f64::INFINITY;
        }
    }
    ScalarField::new(graph.clone(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{distance_field, NodeGraph};
    use crate::spaces::sierpinski_network;
    use std::sync::Arc;

    fn sierpinski_distance(level: usize) -> ScalarField {
        let net = Arc::new(sierpinski_network(level).unwrap());
        distance_field(&net, &[(net.vertex_point(0), 0.0)]).unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let u0 = sierpinski_distance(2);
        assert_eq!(hopf_lax_evolve(&u0, 0.0, 1.0).unwrap().values(), u0.values());
    }

    #[test]
    fn constants_are_stationary() {
        let u0 = sierpinski_distance(2).map(|_| 3.5);
        assert!(hopf_lax_evolve(&u0, 0.7, 1.0).unwrap().values().iter().all(|&v| v == 3.5));
    }

    #[test]
    fn matches_brute_force_ball_minimum() {
        let u0 = sierpinski_distance(3).map(|v| (7.0 * v).sin());
        let graph: &Arc<NodeGraph> = u0.graph();
        let r = 0.2;
        let evolved = hopf_lax_evolve(&u0, r / 2.0, 2.0).unwrap();
        for x in (0..graph.node_count()).step_by(5) {
            let d = graph.distances_from(&graph.sites()[x]);
            let brute = (0..graph.node_count())
                .filter(|&y| d[y] <= r)
                .map(|y| u0.values()[y])
                .fold(f64::INFINITY, f64::min);
            assert_eq!(evolved.values()[x], brute, "node {x}");
        }
    }

    #[test]
    fn distance_decreases_by_the_radius() {
        let u0 = sierpinski_distance(4);
        let h = u0.graph().max_gap();
        let u = hopf_lax_evolve(&u0, 0.25, 1.0).unwrap();
        for (a, b) in u.values().iter().zip(u0.values()) {
            assert!((a - (b - 0.25).max(0.0)).abs() <= h + 1e-12);
        }
    }

    #[test]
    fn rejects_negative_time() {
        let u0 = sierpinski_distance(1);
        assert!(hopf_lax_evolve(&u0, -1.0, 1.0).is_err());
        assert!(hopf_lax_evolve(&u0, 1.0, 0.0).is_err());
    }
}
