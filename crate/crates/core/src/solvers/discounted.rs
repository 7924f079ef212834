use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{check_boundary, solve_eikonal, solver_graph, HamiltonianSpec};
use crate::error::{Error, Result};
use crate::metric::{MetricNetwork, NetPoint, ScalarField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscountedOptions {
    /// Node spacing; `None` for a quarter of the shortest edge.
    #[serde(default)]
    pub h_solver: Option<f64>,
    /// Stop once a sweep changes no value by more than this.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for DiscountedOptions {
    fn default() -> Self {
        Self { h_solver: None, tol: 1e-10, max_sweeps: 1_000_000 }
    }
}

/// Output of [`solve_discounted`].
#[derive(Clone, Debug)]
pub struct DiscountedSolution {
    pub field: ScalarField,
    pub sweeps: usize,
    /// Largest change of each sweep.
    pub residuals: Vec<f64>,
}

/// Fixed point of the Bellman update for `λu + |∇u| = f`:
///
/// `u(x) ← min(f(x)/λ, min_y [(1 − e^{−λ d(x,y)}) f_xy / λ + e^{−λ d(x,y)} u(y)])`
///
/// over neighbouring nodes `y`, with boundary nodes clamped to their data.
/// Jacobi sweeps start from `max f / λ` and decrease monotonically. With
/// `λ = 0` the boundary value problem is the weighted eikonal one.
pub fn solve_discounted(
    net: &Arc<MetricNetwork>,
    h: &HamiltonianSpec,
    boundary: &[(NetPoint, f64)],
    opts: &DiscountedOptions,
) -> Result<DiscountedSolution> {
    h.check_solvable(net)?;
    check_boundary(net, boundary)?;
    if !(opts.tol.is_finite() && opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {}", opts.tol)));
    }
    if h.lambda == 0.0 {
        if boundary.is_empty() {
            return Err(Error::InvalidParameter(
                "lambda = 0 needs boundary data to select a solution".into(),
            ));
        }
        let sol = solve_eikonal(net, boundary, &h.forcing, opts.h_solver)?;
        return Ok(DiscountedSolution { field: sol.field, sweeps: 0, residuals: Vec::new() });
    }

    let lambda = h.lambda;
    let points: Vec<NetPoint> = boundary.iter().map(|b| b.0).collect();
    let graph = solver_graph(net, opts.h_solver, &points)?;
    let n = graph.node_count();

    let mut clamp: Vec<Option<f64>> = vec![None; n];
    for (p, g) in boundary {
        let node = graph.node_at(p).expect("boundary points are nodes");
        clamp[node] = Some(clamp[node].map_or(*g, |c: f64| c.min(*g)));
    }
    let stay: Vec<f64> = (0..n).map(|x| h.forcing.node_range(&graph, x).0 / lambda).collect();
    // per link: (discount, running cost)
    let links: Vec<Vec<(usize, f64, f64)>> = graph
        .adjacency()
        .iter()
        .map(|adj| {
            adj.iter()
                .map(|l| {
                    let decay = (-lambda * l.length).exp();
                    (l.to, decay, -(-lambda * l.length).exp_m1() * h.forcing.on_edge(l.edge) / lambda)
                })
                .collect()
        })
        .collect();

    let start = h.forcing.max() / lambda;
    let mut u: Vec<f64> = clamp.iter().map(|c| c.unwrap_or(start)).collect();
    let mut next = u.clone();
    let mut residuals = Vec::new();
    loop {
        let mut change: f64 = 0.0;
        for x in 0..n {
            if clamp[x].is_some() {
                continue;
            }
            let mut best = stay[x];
            for &(y, decay, cost) in &links[x] {
                best = best.min(cost + decay * u[y]);
            }
            change = change.max((best - u[x]).abs());
            next[x] = best;
        }
        std::mem::swap(&mut u, &mut next);
        residuals.push(change);
        if change < opts.tol {
            break;
        }
        if residuals.len() >= opts.max_sweeps {
            return Err(Error::NotConverged { sweeps: residuals.len(), residual: change });
        }
    }
    let sweeps = residuals.len();
    Ok(DiscountedSolution { field: ScalarField::new(graph, u)?, sweeps, residuals })
}
