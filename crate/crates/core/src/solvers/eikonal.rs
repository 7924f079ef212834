use std::sync::Arc;

use super::{check_boundary, solver_graph, Forcing};
use crate::error::{Error, Result};
use crate::metric::{label_setting, MetricNetwork, NetPoint, ScalarField};

/// Output of [`solve_eikonal`].
#[derive(Clone, Debug)]
pub struct EikonalSolution {
    pub field: ScalarField,
    /// Boundary pairs `(i, j)` where `g_j` exceeds `g_i` plus the weighted
    /// distance from point `i`; there the field is the maximal subsolution
    /// and takes a value below `g_j` at point `j`.
    pub incompatible: Vec<(usize, usize)>,
}

/// `u(x) = min_i (g_i + ∫ f ds along the cheapest path from p_i to x)`,
/// exact at the nodes for edgewise-constant `f`.
pub fn solve_eikonal(
    net: &Arc<MetricNetwork>,
    boundary: &[(NetPoint, f64)],
    forcing: &Forcing,
    h_solver: Option<f64>,
) -> Result<EikonalSolution> {
    if boundary.is_empty() {
        return Err(Error::EmptySources);
    }
    check_boundary(net, boundary)?;
    forcing.validate(net)?;
    let points: Vec<NetPoint> = boundary.iter().map(|b| b.0).collect();
    let graph = solver_graph(net, h_solver, &points)?;

    let mut seeds = Vec::new();
    let mut seed_owner = Vec::new();
    for (i, (p, g)) in boundary.iter().enumerate() {
        for s in graph.seeds(p, *g, forcing.on_edge(p.edge)) {
            seeds.push(s);
            seed_owner.push(i);
        }
    }
    let labels = label_setting(graph.adjacency(), &seeds, |l| l.length * forcing.on_edge(l.edge));
    if !labels.all_reached() {
        return Err(Error::CorruptNetwork("disconnected node graph".into()));
    }

    let mut incompatible = Vec::new();
    for (j, (p, g)) in boundary.iter().enumerate() {
        let node = graph.node_at(p).expect("boundary points are nodes");
        let tol = 1e-12 * g.abs().max(1.0);
        if labels.dist[node] < g - tol {
            incompatible.push((seed_owner[labels.origin[node]], j));
        }
    }
    let field = ScalarField::new(graph, labels.dist)?;
    Ok(EikonalSolution { field, incompatible })
}
