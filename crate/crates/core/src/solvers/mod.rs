//! Hamilton–Jacobi solvers on networks and a squared-distance viscosity
//! checker.
//!
//! Every solver works on a [`NodeGraph`] refined to a spacing `h_solver`
//! (default: a quarter of the shortest edge) with boundary points inserted
//! as nodes, and returns a piecewise-linear [`ScalarField`].

mod discounted;
mod eikonal;
mod hopf_lax;
mod viscosity;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{AmbientPoint, MetricNetwork, NetPoint, NodeGraph};

pub use discounted::{solve_discounted, DiscountedOptions, DiscountedSolution};
pub use eikonal::{solve_eikonal, EikonalSolution};
pub use hopf_lax::hopf_lax_evolve;
pub use viscosity::{viscosity_check, write_violations_csv, Violation, ViscosityOptions};

/// Running cost `f`, constant or one positive value per network edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Forcing {
    Constant(f64),
    PerEdge(Vec<f64>),
}

impl Forcing {
    pub fn on_edge(&self, edge: usize) -> f64 {
        match self {
            Forcing::Constant(c) => *c,
            Forcing::PerEdge(values) => values[edge],
        }
    }

    pub fn max(&self) -> f64 {
        match self {
            Forcing::Constant(c) => *c,
            Forcing::PerEdge(values) => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Checks positivity and, for per-edge data, the edge count.
    pub fn validate(&self, net: &MetricNetwork) -> Result<()> {
        let values: &[f64] = match self {
            Forcing::Constant(c) => std::slice::from_ref(c),
            Forcing::PerEdge(values) => {
                if values.len() != net.edge_count() {
                    return Err(Error::InvalidParameter(format!(
                        "{} forcing values for {} edges",
                        values.len(),
                        net.edge_count()
                    )));
                }
                values
            }
        };
        match values.iter().find(|f| !(f.is_finite() && **f > 0.0)) {
            Some(f) => Err(Error::InvalidParameter(format!("forcing must be positive, got {f}"))),
            None => Ok(()),
        }
    }

    /// Smallest and largest value on the edges meeting at a node.
    pub fn node_range(&self, graph: &NodeGraph, node: usize) -> (f64, f64) {
        graph.adjacency()[node]
            .iter()
            .map(|l| self.on_edge(l.edge))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), f| (lo.min(f), hi.max(f)))
    }
}

/// Black-box `H(x, u, p)`.
pub type HamiltonianFn = Arc<dyn Fn(AmbientPoint, f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum HamiltonianForm {
    /// `λu + p − f(x)`.
    Eikonal,
    /// Evaluation only; rejected by the solvers.
    Generic(HamiltonianFn),
}

/// A Hamiltonian `H(x, u, p)` with its monotonicity parameter `λ`.
#[derive(Clone)]
pub struct HamiltonianSpec {
    pub lambda: f64,
    pub forcing: Forcing,
    pub form: HamiltonianForm,
}

impl fmt::Debug for HamiltonianSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let form = match self.form {
            HamiltonianForm::Eikonal => "eikonal",
            HamiltonianForm::Generic(_) => "generic",
        };
        f.debug_struct("HamiltonianSpec")
            .field("lambda", &self.lambda)
            .field("forcing", &self.forcing)
            .field("form", &form)
            .finish()
    }
}

impl HamiltonianSpec {
    pub fn eikonal(lambda: f64, forcing: Forcing) -> Self {
        Self { lambda, forcing, form: HamiltonianForm::Eikonal }
    }

    pub fn generic(h: impl Fn(AmbientPoint, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { lambda: 0.0, forcing: Forcing::Constant(1.0), form: HamiltonianForm::Generic(Arc::new(h)) }
    }

    pub fn is_eikonal(&self) -> bool {
        matches!(self.form, HamiltonianForm::Eikonal)
    }

    pub(crate) fn check_solvable(&self, net: &MetricNetwork) -> Result<()> {
        if !self.is_eikonal() {
            return Err(Error::Unsupported("generic Hamiltonians are evaluation-only".into()));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!("lambda must be ≥ 0, got {}", self.lambda)));
        }
        self.forcing.validate(net)
    }

    /// `H(x, u, p)` at a node. At vertices where the forcing jumps, the
    /// subsolution test uses the largest incident value and the
    /// supersolution test the smallest.
    pub fn evaluate(&self, graph: &NodeGraph, node: usize, u: f64, p: f64, mode: Mode) -> f64 {
        match &self.form {
            HamiltonianForm::Eikonal => {
                let (lo, hi) = self.forcing.node_range(graph, node);
                let f = match mode {
                    Mode::Sub => hi,
                    Mode::Super => lo,
                };
                self.lambda * u + p - f
            }
            HamiltonianForm::Generic(h) => h(graph.positions()[node], u, p),
        }
    }
}

/// Which half of the viscosity definition to test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Mode {
    Sub,
    Super,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Sub => "SUB",
            Mode::Super => "SUPER",
        })
    }
}

/// Node graph at `h_solver` (or the default spacing) with `points`
/// inserted.
pub(crate) fn solver_graph(
    net: &Arc<MetricNetwork>,
    h_solver: Option<f64>,
    points: &[NetPoint],
) -> Result<Arc<NodeGraph>> {
    let graph = match h_solver {
        Some(h) => NodeGraph::refine(net.clone(), h, points)?,
        None => NodeGraph::with_default_spacing(net.clone(), points)?,
    };
    Ok(Arc::new(graph))
}

pub(crate) fn check_boundary(net: &MetricNetwork, boundary: &[(NetPoint, f64)]) -> Result<()> {
    for (p, g) in boundary {
        net.validate_point(p)?;
        if !g.is_finite() {
            return Err(Error::InvalidParameter(format!("boundary value {g}")));
        }
    }
    Ok(())
}
