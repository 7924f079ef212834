use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::metric::{AmbientPoint, Edge, MetricNetwork};

fn on_circle(theta: f64) -> AmbientPoint {
    AmbientPoint::new(theta.cos(), theta.sin())
}

/// The unit-circle arc `{(cos θ, sin θ) : 0 ≤ θ ≤ 2π − 1/n}` as a path of
/// `segments` pieces with exact arc lengths.
pub fn arc(n: usize, segments: usize) -> Result<MetricNetwork> {
    if n == 0 || segments == 0 {
        return Err(Error::InvalidParameter("arc needs n ≥ 1 and segments ≥ 1".into()));
    }
    let span = TAU - 1.0 / n as f64;
    let step = span / segments as f64;
    let vertices = (0..=segments).map(|k| on_circle(k as f64 * step)).collect();
    let edges = (0..segments).map(|k| Edge::new(k, k + 1, step)).collect();
    MetricNetwork::new(vertices, edges)
}

/// The full unit circle as a closed loop of `segments` arcs.
pub fn circle(segments: usize) -> Result<MetricNetwork> {
    if segments < 3 {
        return Err(Error::InvalidParameter("circle needs at least 3 segments".into()));
    }
    let step = TAU / segments as f64;
    let vertices = (0..segments).map(|k| on_circle(k as f64 * step)).collect();
    let edges = (0..segments).map(|k| Edge::new(k, (k + 1) % segments, step)).collect();
    MetricNetwork::new(vertices, edges)
}
