use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{correspondence, log2_slope, semilimits_with_gaps, LevelSamples, SemilimitOptions};
use crate::error::{Error, Result};
use crate::hausdorff::{
    check_h2, hausdorff_distance, sample, H2Options, SampleCloud, SpaceSequence, Verdict,
};
use crate::metric::{AmbientMetric, AmbientPoint, MetricNetwork, NetPoint, ScalarField};
use crate::solvers::{
    hopf_lax_evolve, solve_discounted, solve_eikonal, DiscountedOptions, Forcing, HamiltonianSpec,
};
use crate::spaces::{Space, SpaceDescriptor};

/// Printed with every report: hypotheses the harness relies on but never
/// checks.
pub const UNCHECKED_ASSUMPTIONS: &str = "existence and uniqueness hypotheses for the limit \
equation are assumed, not verified; the limit solution is a deep-level proxy when the limit is \
a network";

fn one() -> f64 {
    1.0
}

fn three() -> usize {
    3
}

fn default_tol() -> f64 {
    1e-10
}

fn default_sweeps() -> usize {
    1_000_000
}

/// Which equation each level solves.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SolverChoice {
    /// `|∇u| = f` with boundary data.
    #[default]
    Eikonal,
    /// `λu + |∇u| = f`, boundary optional.
    Discounted {
        #[serde(default = "default_tol")]
        tol: f64,
        #[serde(default = "default_sweeps")]
        max_sweeps: usize,
    },
    /// The eikonal solution evolved by `∂_t u + speed·|∇u| = 0` up to `t`.
    HopfLax {
        t: f64,
        #[serde(default = "one")]
        speed: f64,
    },
}

/// Boundary datum given by ambient position; each level uses its nearest
/// sample point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub at: AmbientPoint,
    #[serde(default)]
    pub value: f64,
}

/// Solve the same problem on every level of a family and on its limit,
/// then measure how the level solutions approach the limit one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityExperiment {
    pub family: SpaceDescriptor,
    /// Strictly increasing level indices.
    pub levels: Vec<usize>,
    pub limit: SpaceDescriptor,
    /// Defaults to the limit family's natural metric.
    #[serde(default)]
    pub ambient: Option<AmbientMetric>,
    #[serde(default)]
    pub solver: SolverChoice,
    #[serde(default)]
    pub lambda: f64,
    /// Constant running cost.
    #[serde(default = "one")]
    pub forcing: f64,
    /// Optional per-level `(λ_n, f_n)`, one pair per level.
    #[serde(default)]
    pub level_parameters: Option<Vec<(f64, f64)>>,
    #[serde(default)]
    pub boundary: Vec<BoundaryPoint>,
    /// Sample spacing for matching and Hausdorff distances.
    pub density: f64,
    /// Semilimit radii per level; default `2·d_H(limit nodes, level nodes)
    /// + density`.
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
    #[serde(default = "three")]
    pub window: usize,
    #[serde(default)]
    pub h_solver: Option<f64>,
    #[serde(default)]
    pub h2: Option<H2Options>,
    /// Largest acceptable matched error at the deepest level.
    pub tolerance: f64,
}

/// Measurements at one level.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub resolution: f64,
    pub hausdorff: f64,
    pub radius: f64,
    pub h2_gap: Option<f64>,
    /// `sup_x |uⁿ(match_n(x)) − u^∞(x)|` over the limit nodes.
    pub sup_error: f64,
    /// Sup distance from the limit solution of the semilimits over the
    /// window of levels ending here.
    pub upper_semilimit_gap: f64,
    pub lower_semilimit_gap: f64,
    /// `|λ_n − λ| + |f_n − f|`.
    pub drift: f64,
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Slope of `log₂ sup_error` against `log₂ resolution`.
    pub fitted_rate: Option<f64>,
    /// `sup |u^{n_last} − u^{n_prev}|` at the matched limit nodes.
    pub proxy_self_error: Option<f64>,
    pub limit: String,
    pub window: usize,
    pub h2_verdict: Option<Verdict>,
    /// Whether the lower semilimit stayed below the upper one everywhere.
    pub semilimits_ordered: bool,
    /// PASS iff the last error is within tolerance, no larger than the
    /// first, and the distance check (if run) passed.
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl ConvergenceReport {
    pub fn last(&self) -> Option<&ConvergenceRow> {
        self.rows.last()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "n",
            "hausdorff",
            "h2_gap",
            "sup_error",
            "upper_semilimit_gap",
            "lower_semilimit_gap",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.n.to_string(),
                r.hausdorff.to_string(),
                r.h2_gap.map(|g| g.to_string()).unwrap_or_default(),
                r.sup_error.to_string(),
                r.upper_semilimit_gap.to_string(),
                r.lower_semilimit_gap.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Whitespace-separated `log₂ resolution` and `log₂ sup_error`, one
    /// level per line; levels with zero error are skipped.
    pub fn write_plot_data<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# log2_resolution log2_sup_error")?;
        for r in self.rows.iter().filter(|r| r.sup_error > 0.0) {
            writeln!(out, "{} {}", r.resolution.log2(), r.sup_error.log2())?;
        }
        Ok(())
    }

    /// `key: value` lines summarising the scalar results.
    pub fn summary(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| v.to_string());
        let mut lines = vec![
            format!("limit: {}", self.limit),
            format!("fitted_rate: {}", opt(self.fitted_rate)),
            format!("proxy_self_error: {}", opt(self.proxy_self_error)),
            format!("window: {}", self.window),
            format!("parameter_drift: {}", self.rows.iter().map(|r| r.drift).fold(0.0, f64::max)),
            format!("semilimits_ordered: {}", self.semilimits_ordered),
        ];
        if let Some(v) = self.h2_verdict {
            lines.push(format!("h2_verdict: {v}"));
        }
        lines.push(format!("verdict: {}", self.verdict));
        lines.extend(self.notes.iter().map(|n| format!("note: {n}")));
        lines
    }
}

/// Solution on one space, listed at the points where it is compared.
struct Solved {
    points: Vec<AmbientPoint>,
    values: Vec<f64>,
    field: Option<ScalarField>,
}

impl StabilityExperiment {
    fn ambient(&self) -> AmbientMetric {
        self.ambient.unwrap_or_else(|| self.limit.default_ambient())
    }

    fn parameters(&self, k: usize) -> (f64, f64) {
        self.level_parameters.as_ref().map_or((self.lambda, self.forcing), |p| p[k])
    }

    fn validate(&self) -> Result<()> {
        if self.levels.is_empty() || self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("levels must be nonempty and strictly increasing".into()));
        }
        if !(self.density.is_finite() && self.density > 0.0) {
            return Err(Error::InvalidParameter(format!("density {}", self.density)));
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return Err(Error::InvalidParameter(format!("tolerance {}", self.tolerance)));
        }
        if let Some(p) = &self.level_parameters {
            if p.len() != self.levels.len() {
                return Err(Error::InvalidParameter(format!(
                    "{} level parameter pairs for {} levels",
                    p.len(),
                    self.levels.len()
                )));
            }
        }
        if let Some(r) = &self.radii {
            if r.len() != self.levels.len() {
                return Err(Error::InvalidParameter(format!(
                    "{} radii for {} levels",
                    r.len(),
                    self.levels.len()
                )));
            }
        }
        let needs_boundary = !matches!(self.solver, SolverChoice::Discounted { .. }) || self.lambda == 0.0;
        if needs_boundary && self.boundary.is_empty() {
            return Err(Error::EmptySources);
        }
        Ok(())
    }

    /// Runs every solve and assembles the report.
    pub fn run(&self) -> Result<ConvergenceReport> {
        self.validate()?;
        let metric = self.ambient();
        let limit_space = self.limit.build()?;
        let limit_cloud = sample(&limit_space, self.density)?;
        let limit = self.solve(&limit_space, &limit_cloud, self.lambda, self.forcing)?;

        let outcomes: Vec<LevelOutcome> = self
            .levels
            .par_iter()
            .enumerate()
            .map(|(k, &n)| self.run_level(k, n, &limit, &limit_cloud))
            .collect::<Result<_>>()?;

        let radii: Vec<f64> = match &self.radii {
            Some(r) => r.clone(),
            None => outcomes.iter().map(|o| 2.0 * o.node_gap + self.density).collect(),
        };
        let samples: Vec<LevelSamples> = outcomes.iter().map(|o| o.samples.clone()).collect();
        let node_gaps: Vec<f64> = outcomes.iter().map(|o| o.node_gap).collect();
        let opts = SemilimitOptions { window: self.window, metric };

        let h2 = match &self.h2 {
            Some(h2_opts) => {
                let seq = SpaceSequence::new(
                    self.levels.iter().zip(&outcomes).map(|(&n, o)| (n, o.space.clone())).collect(),
                    limit_space.clone(),
                    metric,
                );
                Some(check_h2(&seq, h2_opts)?)
            }
            None => None,
        };

        let mut rows = Vec::with_capacity(outcomes.len());
        let mut ordered = true;
        for (k, o) in outcomes.iter().enumerate() {
            let s = semilimits_with_gaps(
                &samples[..=k],
                &limit.points,
                &radii[..=k],
                Some(&node_gaps[..=k]),
                opts,
            )?;
            ordered &= s.lower.iter().zip(&s.upper).all(|(lo, hi)| lo <= hi);
            let gap = |v: &[f64]| v.iter().zip(&limit.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let (lambda_n, f_n) = self.parameters(k);
            rows.push(ConvergenceRow {
                n: o.n,
                resolution: self.family.with_level(o.n).resolution().unwrap_or(o.n as f64),
                hausdorff: o.hausdorff,
                radius: radii[k],
                h2_gap: h2.as_ref().map(|r| r.rows[k].max_gap),
                sup_error: o.sup_error,
                upper_semilimit_gap: gap(&s.upper),
                lower_semilimit_gap: gap(&s.lower),
                drift: (lambda_n - self.lambda).abs() + (f_n - self.forcing).abs(),
            });
        }

        let fitted_rate = log2_slope(&rows.iter().map(|r| (r.resolution, r.sup_error)).collect::<Vec<_>>());
        let proxy_self_error = (outcomes.len() >= 2).then(|| {
            let (a, b) = (&outcomes[outcomes.len() - 2].matched, &outcomes[outcomes.len() - 1].matched);
            a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
        });
        let (first, last) = (rows[0].sup_error, rows[rows.len() - 1].sup_error);
        let h2_verdict = h2.as_ref().map(|r| r.verdict);
        let pass = last <= self.tolerance && last <= first && h2_verdict.is_none_or(Verdict::passed);

        let mut notes = vec![UNCHECKED_ASSUMPTIONS.to_string()];
        if limit.field.is_some() && self.limit.level().is_some() {
            notes.push(format!("limit solution computed on the proxy {}", self.limit));
        }
        if let Some(r) = &h2 {
            if let Some((a, b)) = r.witness() {
                notes.push(format!("distance check witness pair ({a}) ({b})"));
            }
        }
        Ok(ConvergenceReport {
            rows,
            fitted_rate,
            proxy_self_error,
            limit: self.limit.to_string(),
            window: self.window,
            h2_verdict,
            semilimits_ordered: ordered,
            verdict: if pass { Verdict::Pass } else { Verdict::Fail },
            notes,
        })
    }

    fn run_level(
        &self,
        k: usize,
        n: usize,
        limit: &Solved,
        limit_cloud: &SampleCloud,
    ) -> Result<LevelOutcome> {
        let metric = self.ambient();
        let space = self.family.with_level(n).build()?;
        let cloud = sample(&space, self.density)?;
        let (lambda, f) = self.parameters(k);
        let solved = self.solve(&space, &cloud, lambda, f)?;
        let field = solved.field.as_ref().expect("levels are networks");

        let matching = correspondence(&limit.points, &cloud, metric)?;
        let locations = cloud.locations().expect("network samples carry locations");
        let matched: Vec<f64> = matching.matches.iter().map(|&i| field.value_at(&locations[i])).collect();
        let sup_error = matched.iter().zip(&limit.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

        let samples = LevelSamples::nodes(n, field);
        let node_gap = hausdorff_distance(
            &SampleCloud::from_points(limit.points.clone()),
            &SampleCloud::from_points(samples.points.clone()),
            metric,
        )?;
        Ok(LevelOutcome {
            n,
            space,
            hausdorff: hausdorff_distance(limit_cloud, &cloud, metric)?,
            node_gap,
            sup_error,
            matched,
            samples,
        })
    }

    fn solve(&self, space: &Space, cloud: &SampleCloud, lambda: f64, f: f64) -> Result<Solved> {
        match space {
            Space::Plane(_) => self.solve_plane(cloud, lambda, f),
            _ => {
                let net = space.require_network()?;
                let locations = cloud.locations().expect("network samples carry locations");
                let index = cloud.index();
                let boundary: Vec<(NetPoint, f64)> = self
                    .boundary
                    .iter()
                    .map(|b| {
                        let (i, _) = index.nearest(&b.at, self.ambient()).expect("nonempty cloud");
                        (locations[i], b.value)
                    })
                    .collect();
                let field = self.solve_network(net, &boundary, lambda, f)?;
                Ok(Solved {
                    points: field.graph().positions().to_vec(),
                    values: field.values().to_vec(),
                    field: Some(field),
                })
            }
        }
    }

    fn solve_network(
        &self,
        net: &Arc<MetricNetwork>,
        boundary: &[(NetPoint, f64)],
        lambda: f64,
        f: f64,
    ) -> Result<ScalarField> {
        let forcing = Forcing::Constant(f);
        match self.solver {
            SolverChoice::Eikonal => {
                if lambda != 0.0 {
                    return Err(Error::InvalidParameter("the eikonal solver needs lambda = 0".into()));
                }
                Ok(solve_eikonal(net, boundary, &forcing, self.h_solver)?.field)
            }
            SolverChoice::Discounted { tol, max_sweeps } => {
                let h = HamiltonianSpec::eikonal(lambda, forcing);
                let opts = DiscountedOptions { h_solver: self.h_solver, tol, max_sweeps };
                Ok(solve_discounted(net, &h, boundary, &opts)?.field)
            }
            SolverChoice::HopfLax { t, speed } => {
                let u0 = solve_eikonal(net, boundary, &forcing, self.h_solver)?.field;
                hopf_lax_evolve(&u0, t, speed)
            }
        }
    }

    /// Closed forms on the plane, with the ambient metric as distance.
    fn solve_plane(&self, cloud: &SampleCloud, lambda: f64, f: f64) -> Result<Solved> {
        let metric = self.ambient();
        let points = cloud.points().to_vec();
        let cone = |x: &AmbientPoint, shift: f64| {
            self.boundary
                .iter()
                .map(|b| b.value + f * (metric.distance(x, &b.at) - shift).max(0.0))
                .fold(f64::INFINITY, f64::min)
        };
        let values: Vec<f64> = match self.solver {
            SolverChoice::Eikonal => points.iter().map(|x| cone(x, 0.0)).collect(),
            SolverChoice::HopfLax { t, speed } => points.iter().map(|x| cone(x, speed * t)).collect(),
            SolverChoice::Discounted { .. } if lambda == 0.0 => points.iter().map(|x| cone(x, 0.0)).collect(),
            SolverChoice::Discounted { .. } => points
                .iter()
                .map(|x| {
                    self.boundary.iter().fold(f / lambda, |best, b| {
                        let decay = (-lambda * metric.distance(x, &b.at)).exp();
                        best.min((1.0 - decay) * f / lambda + decay * b.value)
                    })
                })
                .collect(),
        };
        Ok(Solved { points, values, field: None })
    }
}

struct LevelOutcome {
    n: usize,
    space: Space,
    hausdorff: f64,
    /// Hausdorff distance between the limit nodes and this level's nodes.
    node_gap: f64,
    sup_error: f64,
    /// Level values at the matches of the limit nodes.
    matched: Vec<f64>,
    samples: LevelSamples,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{Window, SIERPINSKI_CORNERS};

    fn sierpinski(levels: Vec<usize>, proxy: usize, density: f64) -> StabilityExperiment {
        StabilityExperiment {
            family: SpaceDescriptor::SierpinskiNetwork { n: 0 },
            levels,
            limit: SpaceDescriptor::SierpinskiNetwork { n: proxy },
            ambient: None,
            solver: SolverChoice::Eikonal,
            lambda: 0.0,
            forcing: 1.0,
            level_parameters: None,
            boundary: vec![BoundaryPoint { at: SIERPINSKI_CORNERS[0], value: 0.0 }],
            density,
            radii: None,
            window: 3,
            h_solver: None,
            h2: None,
            tolerance: 0.1,
        }
    }

    #[test]
    fn sierpinski_eikonal_converges() {
        let density = 1.0 / 256.0;
        let report = sierpinski(vec![1, 2, 3, 4, 5], 7, density).run().unwrap();
        for r in &report.rows {
            assert!(r.sup_error <= 4.0 * 0.5f64.powi(r.n as i32) + 2.0 * density, "{r:?}");
            assert!(r.upper_semilimit_gap.is_finite() && r.lower_semilimit_gap.is_finite());
        }
        assert!(report.semilimits_ordered);
        let rate = report.fitted_rate.unwrap();
        assert!((-1.3..=-0.7).contains(&rate), "rate {rate}");
        assert_eq!(report.verdict, Verdict::Pass);
    }

    #[test]
    fn lattice_against_the_manhattan_plane() {
        let window = Window::new(0.0, 0.0, 3.0, 3.0);
        let exp = StabilityExperiment {
            family: SpaceDescriptor::Lattice { n: 1, window },
            levels: vec![1, 2, 4, 8, 16],
            limit: SpaceDescriptor::Plane { window },
            boundary: vec![BoundaryPoint { at: AmbientPoint::ORIGIN, value: 0.0 }],
            density: 0.02,
            tolerance: 0.5,
            ..sierpinski(vec![1], 2, 0.1)
        };
        let report = exp.run().unwrap();
        for r in &report.rows {
            assert!(r.sup_error <= 3.0 / r.n as f64, "{r:?}");
        }
        assert!(report.semilimits_ordered);
        assert_eq!(report.verdict, Verdict::Pass);
    }

    #[test]
    fn arc_sequence_fails() {
        let exp = StabilityExperiment {
            family: SpaceDescriptor::Arc { n: 1, segments: 128 },
            levels: vec![10, 30, 100],
            limit: SpaceDescriptor::Circle { segments: 128 },
            boundary: vec![BoundaryPoint { at: AmbientPoint::new(1.0, 0.0), value: 0.0 }],
            density: 0.01,
            h2: Some(H2Options::new(30, 5, 0.01, 0.1).with_probes(32)),
            tolerance: 0.1,
            ..sierpinski(vec![1], 2, 0.1)
        };
        let report = exp.run().unwrap();
        assert_eq!(report.h2_verdict, Some(Verdict::Fail));
        assert_eq!(report.verdict, Verdict::Fail);
        assert!(report.last().unwrap().sup_error > 6.0);
    }

    #[test]
    fn reports_are_deterministic() {
        let exp = sierpinski(vec![1, 2, 3], 5, 1.0 / 64.0);
        let mut outputs = Vec::new();
        for _ in 0..2 {
            let mut text = Vec::new();
            exp.run().unwrap().write_csv(&mut text).unwrap();
            outputs.push(text);
        }
        assert_eq!(outputs[0], outputs[1]);
        let text = String::from_utf8(outputs.pop().unwrap()).unwrap();
        assert!(text.starts_with("n,hausdorff,h2_gap,sup_error,upper_semilimit_gap,lower_semilimit_gap\n"));
    }

    #[test]
    fn discounted_and_hopf_lax_variants_run() {
        let mut exp = sierpinski(vec![2, 3, 4], 6, 1.0 / 128.0);
        exp.solver = SolverChoice::Discounted { tol: 1e-10, max_sweeps: 100_000 };
        exp.lambda = 1.0;
        let report = exp.run().unwrap();
        assert!(report.rows.iter().all(|r| r.sup_error < 0.3));
        exp.solver = SolverChoice::HopfLax { t: 0.25, speed: 1.0 };
        exp.lambda = 0.0;
        let report = exp.run().unwrap();
        assert!(report.rows.iter().all(|r| r.sup_error < 0.3));
        let mut plot = Vec::new();
        report.write_plot_data(&mut plot).unwrap();
        assert_eq!(String::from_utf8(plot).unwrap().lines().count(), 4);
    }

    #[test]
    fn parameter_drift_is_reported() {
        let mut exp = sierpinski(vec![2, 3], 4, 1.0 / 64.0);
        exp.solver = SolverChoice::Discounted { tol: 1e-10, max_sweeps: 100_000 };
        exp.lambda = 1.0;
        exp.level_parameters = Some(vec![(1.25, 1.0), (1.1, 1.0)]);
        let report = exp.run().unwrap();
        assert!((report.rows[0].drift - 0.25).abs() < 1e-12);
        assert!(report.summary().iter().any(|l| l.starts_with("parameter_drift: 0.25")));
    }

    #[test]
    fn rejects_bad_configs() {
        let mut exp = sierpinski(vec![3, 2], 4, 0.1);
        assert!(exp.run().is_err());
        exp.levels = vec![2, 3];
        exp.boundary.clear();
        assert!(matches!(exp.run(), Err(Error::EmptySources)));
    }

    #[test]
    fn parses_from_json() {
        let text = r#"{
            "family": {"kind": "sierpinski_network", "n": 0},
            "levels": [2, 3],
            "limit": {"kind": "sierpinski_network", "n": 5},
            "boundary": [{"at": [-0.5, 0.0], "value": 0.0}],
            "density": 0.01,
            "tolerance": 0.2,
            "solver": {"kind": "hopf_lax", "t": 0.1}
        }"#;
        let exp: StabilityExperiment = serde_json::from_str(text).unwrap();
        assert_eq!(exp.solver, SolverChoice::HopfLax { t: 0.1, speed: 1.0 });
        assert_eq!(exp.window, 3);
    }
}
