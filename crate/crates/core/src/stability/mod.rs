//! Semilimits of solution sequences across converging spaces and uniform
//! convergence reports.

mod experiment;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hausdorff::{hausdorff_distance, GridIndex, SampleCloud};
use crate::metric::{AmbientMetric, AmbientPoint, ScalarField};

pub use experiment::{
    BoundaryPoint, ConvergenceReport, ConvergenceRow, SolverChoice, StabilityExperiment,
    UNCHECKED_ASSUMPTIONS,
};

/// Nearest point of an approximating cloud for each limit point.
#[derive(Clone, Debug, PartialEq)]
pub struct Correspondence {
    /// Index into the approximating cloud.
    pub matches: Vec<usize>,
    /// Ambient distance to the match.
    pub gaps: Vec<f64>,
}

impl Correspondence {
    pub fn max_gap(&self) -> f64 {
        self.gaps.iter().copied().fold(0.0, f64::max)
    }
}

/// Ambient-nearest match in `approx` for every point of `limit` (smallest
/// index on ties).
pub fn correspondence(
    limit: &[AmbientPoint],
    approx: &SampleCloud,
    metric: AmbientMetric,
) -> Result<Correspondence> {
    if limit.is_empty() || approx.is_empty() {
        return Err(Error::EmptySpace("correspondence between empty sets".into()));
    }
    let index = approx.index();
    let (matches, gaps) = limit.par_iter().map(|p| index.nearest(p, metric).expect("nonempty cloud")).unzip();
    Ok(Correspondence { matches, gaps })
}

/// Values of one level at a finite set of points.
#[derive(Clone, Debug)]
pub struct LevelSamples {
    pub n: usize,
    pub points: Vec<AmbientPoint>,
    pub values: Vec<f64>,
}

impl LevelSamples {
    pub fn new(n: usize, points: Vec<AmbientPoint>, values: Vec<f64>) -> Result<Self> {
        if points.len() != values.len() || points.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "level {n}: {} points for {} values",
                points.len(),
                values.len()
            )));
        }
        Ok(Self { n, points, values })
    }

    /// A field's node values at the node positions.
    pub fn nodes(n: usize, field: &ScalarField) -> Self {
        Self { n, points: field.graph().positions().to_vec(), values: field.values().to_vec() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SemilimitOptions {
    /// Number of trailing levels the extrema range over.
    pub window: usize,
    pub metric: AmbientMetric,
}

impl Default for SemilimitOptions {
    fn default() -> Self {
        Self { window: 3, metric: AmbientMetric::Euclidean }
    }
}

/// Upper and lower semilimits at the same targets.
#[derive(Clone, Debug, PartialEq)]
pub struct Semilimits {
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
}

/// Both semilimit proxies at `targets`: over the last `window` levels, the
/// largest (smallest) level value within ambient distance `radii[k]` of
/// each target.
///
/// Every used radius must be at least twice the Hausdorff distance
/// between the targets and that level's points, so that each ball holds a
/// point of the level.
pub fn semilimits(
    levels: &[LevelSamples],
    targets: &[AmbientPoint],
    radii: &[f64],
    opts: SemilimitOptions,
) -> Result<Semilimits> {
    semilimits_with_gaps(levels, targets, radii, None, opts)
}

/// [`semilimits`] with the per-level Hausdorff distances supplied.
pub(crate) fn semilimits_with_gaps(
    levels: &[LevelSamples],
    targets: &[AmbientPoint],
    radii: &[f64],
    gaps: Option<&[f64]>,
    opts: SemilimitOptions,
) -> Result<Semilimits> {
    if levels.is_empty() || targets.is_empty() {
        return Err(Error::EmptySpace("semilimit of an empty sequence".into()));
    }
    if radii.len() != levels.len() {
        return Err(Error::InvalidParameter(format!("{} radii for {} levels", radii.len(), levels.len())));
    }
    if opts.window == 0 {
        return Err(Error::InvalidParameter("semilimit window must be ≥ 1".into()));
    }
    let first = levels.len().saturating_sub(opts.window);
    let mut upper = vec![f64::NEG_INFINITY; targets.len()];
    let mut lower = vec![f64::INFINITY; targets.len()];
    for k in first..levels.len() {
        let (level, radius) = (&levels[k], radii[k]);
        let gap = match gaps {
            Some(g) => g[k],
            None => hausdorff_distance(
                &SampleCloud::from_points(targets.to_vec()),
                &SampleCloud::from_points(level.points.clone()),
                opts.metric,
            )?,
        };
        if radius.is_nan() || radius < 2.0 * gap {
            return Err(Error::CaptureCondition { level: level.n, radius, required: 2.0 * gap });
        }
        let index = GridIndex::new(&level.points);
        upper.par_iter_mut().zip(lower.par_iter_mut()).zip(targets.par_iter()).for_each(|((hi, lo), x)| {
            index.for_each_within(x, radius, opts.metric, |i, _| {
                let v = level.values[i];
                *hi = hi.max(v);
                *lo = lo.min(v);
            });
        });
    }
    Ok(Semilimits { upper, lower })
}

pub fn upper_semilimit(
    levels: &[LevelSamples],
    targets: &[AmbientPoint],
    radii: &[f64],
    opts: SemilimitOptions,
) -> Result<Vec<f64>> {
    Ok(semilimits(levels, targets, radii, opts)?.upper)
}

pub fn lower_semilimit(
    levels: &[LevelSamples],
    targets: &[AmbientPoint],
    radii: &[f64],
    opts: SemilimitOptions,
) -> Result<Vec<f64>> {
    Ok(semilimits(levels, targets, radii, opts)?.lower)
}

/// Least-squares slope of `log₂ y` against `log₂ x` over the pairs with
/// both coordinates positive; `None` with fewer than two such pairs.
pub fn log2_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> =
        points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.log2(), y.log2())).collect();
    if logs.len() < 2 {
        return None;
    }
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hausdorff::sample;
    use crate::spaces::{lattice_lines, sierpinski_network, Space, Window};
    use std::sync::Arc;

    fn grid(m: usize) -> Vec<AmbientPoint> {
        (0..=m)
            .flat_map(|i| (0..=m).map(move |j| AmbientPoint::new(i as f64 / m as f64, j as f64 / m as f64)))
            .collect()
    }

    #[test]
    fn identity_correspondence() {
        let net = Space::Network(Arc::new(sierpinski_network(2).unwrap()));
        let cloud = sample(&net, 0.05).unwrap();
        let c = correspondence(cloud.points(), &cloud, AmbientMetric::Euclidean).unwrap();
        assert_eq!(c.matches, (0..cloud.len()).collect::<Vec<_>>());
        assert_eq!(c.max_gap(), 0.0);
    }

    #[test]
    fn nested_sierpinski_levels_match_exactly() {
        let coarse = Space::Network(Arc::new(sierpinski_network(2).unwrap()));
        let fine = Space::Network(Arc::new(sierpinski_network(3).unwrap()));
        let density = 1.0 / 64.0;
        let a = sample(&coarse, density).unwrap();
        let b = sample(&fine, density).unwrap();
        let c = correspondence(a.points(), &b, AmbientMetric::Euclidean).unwrap();
        assert!(c.max_gap() < 1e-12, "{}", c.max_gap());
    }

    #[test]
    fn lattice_against_plane_samples() {
        let n = 4;
        let density = 0.01;
        let square = Window::new(0.0, 0.0, 1.0, 1.0);
        let lat = sample(&Space::Network(Arc::new(lattice_lines(n, square).unwrap())), density).unwrap();
        let plane = sample(&Space::Plane(square), density).unwrap();
        let c = correspondence(plane.points(), &lat, AmbientMetric::Euclidean).unwrap();
        assert!(c.max_gap() <= 2f64.sqrt() / (2.0 * n as f64) + density);
    }

    #[test]
    fn constant_and_alternating_sequences() {
        let pts = grid(10);
        let opts = SemilimitOptions::default();
        let constant: Vec<LevelSamples> =
            (1..=5).map(|n| LevelSamples::new(n, pts.clone(), vec![0.7; pts.len()]).unwrap()).collect();
        let s = semilimits(&constant, &pts, &[0.15; 5], opts).unwrap();
        assert!(s.upper.iter().chain(&s.lower).all(|&v| v == 0.7));

        let alternating: Vec<LevelSamples> = (1..=6)
            .map(|n| {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                LevelSamples::new(n, pts.clone(), vec![sign; pts.len()]).unwrap()
            })
            .collect();
        let s = semilimits(&alternating, &pts, &[0.15; 6], opts).unwrap();
        assert!(s.upper.iter().all(|&v| v == 1.0));
        assert!(s.lower.iter().all(|&v| v == -1.0));
    }

    #[test]
    fn capture_condition_is_checked() {
        let targets = grid(10);
        let coarse = LevelSamples::new(1, grid(2), vec![0.0; 9]).unwrap();
        let err = semilimits(&[coarse], &targets, &[0.1], SemilimitOptions::default());
        assert!(matches!(err, Err(Error::CaptureCondition { level: 1, .. })));
    }

    #[test]
    fn window_limits_the_levels_used() {
        let pts = grid(4);
        let levels: Vec<LevelSamples> =
            (1..=4).map(|n| LevelSamples::new(n, pts.clone(), vec![n as f64; pts.len()]).unwrap()).collect();
        let opts = SemilimitOptions { window: 2, ..Default::default() };
        let s = semilimits(&levels, &pts, &[0.3; 4], opts).unwrap();
        assert!(s.upper.iter().all(|&v| v == 4.0));
        assert!(s.lower.iter().all(|&v| v == 3.0));
    }

    #[test]
    fn slope_of_a_power_law() {
        let pts: Vec<(f64, f64)> = (1..6).map(|n| (2f64.powi(n), 3.0 * 2f64.powi(-n))).collect();
        assert!((log2_slope(&pts).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(log2_slope(&[(1.0, 1.0)]), None);
    }
}
