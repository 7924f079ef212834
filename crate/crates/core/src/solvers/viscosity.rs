use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{HamiltonianSpec, Mode};
use crate::error::{Error, Result};
use crate::metric::{label_setting, label_setting_bounded, AmbientPoint, NetPoint, ScalarField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViscosityOptions {
    /// Radius of the intrinsic ball over which touching points must be
    /// extremal; must exceed the node spacing.
    pub radius: f64,
    /// Allowed sign defect of `H`.
    pub tol: f64,
    /// Touching points within `radius` of any of these are skipped.
    #[serde(default)]
    pub exclude: Vec<NetPoint>,
}

/// A touching point where the sign condition fails by more than `tol`.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub anchor: usize,
    pub anchor_position: AmbientPoint,
    pub k: f64,
    /// Node id and position of the touching point.
    pub node: usize,
    pub x_hat: AmbientPoint,
    pub h_value: f64,
    pub mode: Mode,
}

/// Squared-distance test of the viscosity inequalities.
///
/// For each anchor `â` and each `k`, finds the nodes `x̂` where
/// `u − (k/2) d(â, ·)²` is maximal over the `radius`-ball around `x̂`
/// (`Sub`), or `u + (k/2) d(â, ·)²` minimal (`Super`), and evaluates
/// `H(x̂, u(x̂), k d(â, x̂))`. `Sub` requires `H ≤ tol`, `Super` requires
/// `H ≥ −tol`. Plateaus count once, at their lowest node id.
pub fn viscosity_check(
    u: &ScalarField,
    h: &HamiltonianSpec,
    mode: Mode,
    anchors: &[NetPoint],
    k_grid: &[f64],
    opts: &ViscosityOptions,
) -> Result<Vec<Violation>> {
    let graph = u.graph();
    let net = graph.network();
    if !(opts.radius.is_finite() && opts.radius > graph.max_gap()) {
        return Err(Error::RadiusBelowResolution { radius: opts.radius, resolution: graph.max_gap() });
    }
    if let Some(k) = k_grid.iter().find(|k| !(k.is_finite() && **k >= 0.0)) {
        return Err(Error::InvalidParameter(format!("test slope k = {k}")));
    }
    for p in anchors.iter().chain(&opts.exclude) {
        net.validate_point(p)?;
    }
    let n = graph.node_count();
    let adjacency = graph.adjacency();

    let balls: Vec<Vec<usize>> = (0..n)
        .map(|x| {
            let labels = label_setting_bounded(adjacency, &[(x, 0.0)], opts.radius, |l| l.length);
            (0..n).filter(|&y| y != x && labels.dist[y].is_finite()).collect()
        })
        .collect();
    let excluded: Vec<bool> = if opts.exclude.is_empty() {
        vec![false; n]
    } else {
        let seeds: Vec<(usize, f64)> = opts.exclude.iter().flat_map(|p| graph.seeds(p, 0.0, 1.0)).collect();
        let labels = label_setting(adjacency, &seeds, |l| l.length);
        labels.dist.iter().map(|&d| d <= opts.radius).collect()
    };

    let values = u.values();
    let sign = match mode {
        Mode::Sub => 1.0,
        Mode::Super => -1.0,
    };
    let mut out = Vec::new();
    for (ai, anchor) in anchors.iter().enumerate() {
        let d = graph.distances_from(anchor);
        let anchor_position = net.ambient_position(anchor)?;
        for &k in k_grid {
            // maximise sign·(u − sign·(k/2)d²)
            let phi: Vec<f64> = (0..n).map(|x| sign * values[x] - 0.5 * k * d[x] * d[x]).collect();
            for x in 0..n {
                if excluded[x] {
                    continue;
                }
                let top = balls[x].iter().all(|&y| phi[y] < phi[x] || (phi[y] == phi[x] && y > x));
                if !top {
                    continue;
                }
                let value = h.evaluate(graph, x, values[x], k * d[x], mode);
                let failed = match mode {
                    Mode::Sub => value > opts.tol,
                    Mode::Super => value < -opts.tol,
                };
                if failed {
                    out.push(Violation {
                        anchor: ai,
                        anchor_position,
                        k,
                        node: x,
                        x_hat: graph.positions()[x],
                        h_value: value,
                        mode,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// CSV with columns anchor, k, x_hat, h_value, mode.
pub fn write_violations_csv<W: Write>(violations: &[Violation], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["anchor", "k", "x_hat", "h_value", "mode"])?;
    for v in violations {
        w.write_record([
            v.anchor_position.to_string(),
            v.k.to_string(),
            v.x_hat.to_string(),
            v.h_value.to_string(),
            v.mode.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
