//! Sampled Hausdorff distances between embedded spaces and an empirical
//! checker for convergence of intrinsic distances along nearest-point
//! sequences.
//!
//! The checker is a semi-decision: a large gap with its witnessing pair
//! certifies failure, while small gaps over finitely many pairs are only
//! evidence of convergence.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{AmbientMetric, AmbientPoint, MetricNetwork, NetPoint};
use crate::spaces::{Space, SpaceDescriptor, Window};

/// Finite point sample of a space.
#[derive(Clone, Debug)]
pub struct SampleCloud {
    points: Vec<AmbientPoint>,
    locations: Option<Vec<NetPoint>>,
    density: f64,
}

impl SampleCloud {
    /// Cloud of bare ambient points (for analytically given sets).
    pub fn from_points(points: Vec<AmbientPoint>) -> Self {
        Self { points, locations: None, density: 0.0 }
    }

    pub fn points(&self) -> &[AmbientPoint] {
        &self.points
    }

    /// Network location of each sample, for network spaces.
    pub fn locations(&self) -> Option<&[NetPoint]> {
        self.locations.as_deref()
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn index(&self) -> GridIndex<'_> {
        GridIndex::new(&self.points)
    }
}

/// Samples along every edge at spacing at most `density`.
///
/// Vertices come first (in id order), then the interior samples of each
/// edge in edge order. Meshed regions contribute the nodes of their Steiner
/// graph, and plane windows a square grid.
pub fn sample(space: &Space, density: f64) -> Result<SampleCloud> {
    if !(density.is_finite() && density > 0.0) {
        return Err(Error::InvalidParameter(format!("sample density {density}")));
    }
    match space {
        Space::Network(net) => Ok(sample_network(net, density)),
        Space::Mesh(mesh) => {
            let net = mesh.network();
            Ok(SampleCloud {
                points: net.vertices().to_vec(),
                locations: Some((0..net.vertex_count()).map(|v| net.vertex_point(v)).collect()),
                density: mesh.h_mesh,
            })
        }
        Space::Plane(window) => Ok(sample_window(window, density)),
    }
}

fn sample_network(net: &MetricNetwork, density: f64) -> SampleCloud {
    let mut points = net.vertices().to_vec();
    let mut locations: Vec<NetPoint> = (0..net.vertex_count()).map(|v| net.vertex_point(v)).collect();
    for (i, e) in net.edges().iter().enumerate() {
        let pieces = (e.length / density - 1e-9).ceil().max(1.0) as usize;
        for k in 1..pieces {
            let t = k as f64 / pieces as f64;
            points.push(net.edge_position(i, t));
            locations.push(NetPoint { edge: i, offset: t * e.length });
        }
    }
    SampleCloud { points, locations: Some(locations), density }
}

fn sample_window(w: &Window, density: f64) -> SampleCloud {
    let nx = (w.width() / density - 1e-9).ceil().max(1.0) as usize;
    let ny = (w.height() / density - 1e-9).ceil().max(1.0) as usize;
    let mut points = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            points.push(AmbientPoint::new(
                w.x0 + w.width() * i as f64 / nx as f64,
                w.y0 + w.height() * j as f64 / ny as f64,
            ));
        }
    }
    SampleCloud { points, locations: None, density }
}

/// Uniform bucket grid over a point set for nearest-point queries.
pub struct GridIndex<'a> {
    points: &'a [AmbientPoint],
    origin: AmbientPoint,
    cell: f64,
    cols: usize,
    rows: usize,
    buckets: Vec<Vec<u32>>,
}

impl<'a> GridIndex<'a> {
    pub fn new(points: &'a [AmbientPoint]) -> Self {
        let (mut lo, mut hi) = (AmbientPoint::new(f64::MAX, f64::MAX), AmbientPoint::new(f64::MIN, f64::MIN));
        for p in points {
            lo = AmbientPoint::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = AmbientPoint::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let n = points.len().max(1) as f64;
        let (w, h) = ((hi.x - lo.x).max(0.0), (hi.y - lo.y).max(0.0));
        let cell = (w * h * 2.0 / n).sqrt().max(w.max(h) * 2.0 / n).max(1e-12);
        let cols = ((w / cell) as usize + 1).max(1);
        let rows = ((h / cell) as usize + 1).max(1);
        let mut buckets = vec![Vec::new(); cols * rows];
        let mut index = Self { points, origin: lo, cell, cols, rows, buckets: Vec::new() };
        for (i, p) in points.iter().enumerate() {
            let (c, r) = index.cell_of(p);
            buckets[r * cols + c].push(i as u32);
        }
        index.buckets = buckets;
        index
    }

    fn cell_of(&self, p: &AmbientPoint) -> (usize, usize) {
        let clamp = |v: f64, max: usize| (v.max(0.0) as usize).min(max - 1);
        (
            clamp((p.x - self.origin.x) / self.cell, self.cols),
            clamp((p.y - self.origin.y) / self.cell, self.rows),
        )
    }

    /// Index and distance of the sample nearest to `q` (lowest index on
    /// ties), or `None` for an empty set.
    pub fn nearest(&self, q: &AmbientPoint, metric: AmbientMetric) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let (c, r) = self.cell_of(q);
        let (c, r) = (c as i64, r as i64);
        let mut best: Option<(f64, usize)> = None;
        let max_ring = self.cols.max(self.rows) as i64;
        for ring in 0..=max_ring {
            for dr in -ring..=ring {
                for dc in -ring..=ring {
                    if dr.abs() != ring && dc.abs() != ring {
                        continue;
                    }
                    let (cc, rr) = (c + dc, r + dr);
                    if cc < 0 || rr < 0 || cc >= self.cols as i64 || rr >= self.rows as i64 {
                        continue;
                    }
                    for &i in &self.buckets[rr as usize * self.cols + cc as usize] {
                        let d = metric.distance(q, &self.points[i as usize]);
                        let cand = (d, i as usize);
                        if best.is_none_or(|b| cand.0 < b.0 || (cand.0 == b.0 && cand.1 < b.1)) {
                            best = Some(cand);
                        }
                    }
                }
            }
            // points in later rings are at least `ring · cell` away
            if let Some((d, _)) = best {
                if d < ring as f64 * self.cell {
                    break;
                }
            }
        }
        best.map(|(d, i)| (i, d))
    }
}

impl GridIndex<'_> {
    /// Calls `visit(index, distance)` for every point within `radius` of `q`.
    pub fn for_each_within(
        &self,
        q: &AmbientPoint,
        radius: f64,
        metric: AmbientMetric,
        mut visit: impl FnMut(usize, f64),
    ) {
        if self.points.is_empty() || radius < 0.0 {
            return;
        }
        let lo = self.cell_of(&AmbientPoint::new(q.x - radius, q.y - radius));
        let hi = self.cell_of(&AmbientPoint::new(q.x + radius, q.y + radius));
        for r in lo.1..=hi.1 {
            for c in lo.0..=hi.0 {
                for &i in &self.buckets[r * self.cols + c] {
                    let d = metric.distance(q, &self.points[i as usize]);
                    if d <= radius {
                        visit(i as usize, d);
                    }
                }
            }
        }
    }
}

/// `sup_{a ∈ A} inf_{b ∈ B} d(a, b)`.
pub fn directed_hausdorff(a: &SampleCloud, b: &SampleCloud, metric: AmbientMetric) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySpace("Hausdorff distance of an empty cloud".into()));
    }
    let index = b.index();
    Ok(a.points
        .par_iter()
        .map(|p| index.nearest(p, metric).map_or(f64::INFINITY, |(_, d)| d))
        .reduce(|| 0.0, f64::max))
}

/// Hausdorff distance between two clouds under the ambient metric.
pub fn hausdorff_distance(a: &SampleCloud, b: &SampleCloud, metric: AmbientMetric) -> Result<f64> {
    Ok(directed_hausdorff(a, b, metric)?.max(directed_hausdorff(b, a, metric)?))
}

/// Indexed family of spaces with a limit, all in one ambient plane.
#[derive(Clone, Debug)]
pub struct SpaceSequence {
    pub levels: Vec<(usize, Space)>,
    pub limit: Space,
    pub ambient: AmbientMetric,
}

impl SpaceSequence {
    pub fn new(levels: Vec<(usize, Space)>, limit: Space, ambient: AmbientMetric) -> Self {
        Self { levels, limit, ambient }
    }

    /// Builds `family` at each of `levels` together with `limit`.
    pub fn from_descriptors(
        family: &SpaceDescriptor,
        levels: &[usize],
        limit: &SpaceDescriptor,
        ambient: AmbientMetric,
    ) -> Result<Self> {
        let levels =
            levels.iter().map(|&n| Ok((n, family.with_level(n).build()?))).collect::<Result<Vec<_>>>()?;
        Ok(Self::new(levels, limit.build()?, ambient))
    }
}

/// Settings for [`check_h2`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct H2Options {
    /// Number of random limit pairs.
    pub pairs: usize,
    pub seed: u64,
    /// Sample spacing on the level spaces.
    pub density: f64,
    /// Largest acceptable gap at the deepest level.
    pub tolerance: f64,
    /// Number of limit vertices (evenly spread over the vertex ids) whose
    /// mutual pairs are checked on top of the random ones.
    #[serde(default)]
    pub probes: usize,
}

impl H2Options {
    pub fn new(pairs: usize, seed: u64, density: f64, tolerance: f64) -> Self {
        Self { pairs, seed, density, tolerance, probes: 0 }
    }

    pub fn with_probes(mut self, probes: usize) -> Self {
        self.probes = probes;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        })
    }
}

/// Gap statistics at one level.
#[derive(Clone, Debug, PartialEq)]
pub struct H2Row {
    pub n: usize,
    /// `max |d_n(a_n, b_n) − d_∞(a, b)|` over the pairs.
    pub max_gap: f64,
    pub mean_gap: f64,
    /// Limit pair attaining `max_gap` (lowest pair index on ties).
    pub witness_a: AmbientPoint,
    pub witness_b: AmbientPoint,
    /// `max |d_n(a_n, b_n) − d_m(a_m, b_m)|` against the next listed
    /// level `m`; absent on the last row.
    pub cauchy_gap: Option<f64>,
    /// Whether this level's gap is within the tolerance.
    pub verdict: Verdict,
}

#[derive(Clone, Debug)]
pub struct H2Report {
    pub rows: Vec<H2Row>,
    pub pairs: usize,
    pub tolerance: f64,
    /// PASS iff the last gap is within tolerance and no larger than the
    /// first.
    pub verdict: Verdict,
}

impl H2Report {
    pub fn last(&self) -> Option<&H2Row> {
        self.rows.last()
    }

    /// Witnessing limit pair of the deepest level.
    pub fn witness(&self) -> Option<(AmbientPoint, AmbientPoint)> {
        self.last().map(|r| (r.witness_a, r.witness_b))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "max_gap", "mean_gap", "witness_a", "witness_b", "verdict", "cauchy_gap"])?;
        for r in &self.rows {
            w.write_record([
                r.n.to_string(),
                r.max_gap.to_string(),
                r.mean_gap.to_string(),
                r.witness_a.to_string(),
                r.witness_b.to_string(),
                r.verdict.to_string(),
                r.cauchy_gap.map(|g| g.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// A point of a space: ambient position plus network location if any.
#[derive(Clone, Copy, Debug)]
struct Located {
    at: AmbientPoint,
    on: Option<NetPoint>,
}

/// Distance oracle on one space.
fn pair_distances(space: &Space, metric: AmbientMetric, pairs: &[(Located, Located)]) -> Result<Vec<f64>> {
    let Some(net) = space.network() else {
        return Ok(pairs.iter().map(|(a, b)| metric.distance(&a.at, &b.at)).collect());
    };
    // one sweep per distinct source
    let mut groups: HashMap<(usize, u64), Vec<usize>> = HashMap::new();
    let mut order = Vec::new();
    for (i, (a, _)) in pairs.iter().enumerate() {
        let on = a.on.expect("network point");
        let key = (on.edge, on.offset.to_bits());
        groups.entry(key).or_insert_with(|| {
            order.push(key);
            Vec::new()
        });
        groups.get_mut(&key).expect("inserted").push(i);
    }
    let sweeps: Vec<Vec<(usize, f64)>> = order
        .par_iter()
        .map(|key| {
            let members = &groups[key];
            let source = pairs[members[0]].0.on.expect("network point");
            let dist = net.distances_from(&source)?;
            Ok(members.iter().map(|&i| (i, dist.to(&pairs[i].1.on.expect("network point")))).collect())
        })
        .collect::<Result<_>>()?;
    let mut out = vec![0.0; pairs.len()];
    for (i, d) in sweeps.into_iter().flatten() {
        out[i] = d;
    }
    Ok(out)
}

/// Random limit point, uniform by arclength (networks) or area (plane).
fn random_point(space: &Space, cumulative: &[f64], rng: &mut ChaCha8Rng) -> Located {
    match space.network() {
        Some(net) => {
            let total = *cumulative.last().expect("nonempty network");
            let target = rng.random::<f64>() * total;
            let edge = cumulative.partition_point(|&c| c <= target).min(net.edge_count() - 1);
            let offset = rng.random::<f64>() * net.edges()[edge].length;
            let on = net.point(edge, offset).expect("offset within the edge");
            Located { at: net.ambient_position(&on).expect("valid point"), on: Some(on) }
        }
        None => {
            let Space::Plane(w) = space else { unreachable!("only the plane has no network") };
            let at = AmbientPoint::new(
                w.x0 + rng.random::<f64>() * w.width(),
                w.y0 + rng.random::<f64>() * w.height(),
            );
            Located { at, on: None }
        }
    }
}

/// Limit pairs: `pairs` random ones followed by all pairs among the probe
/// vertices.
fn limit_pairs(limit: &Space, opts: &H2Options) -> Vec<(Located, Located)> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let cumulative: Vec<f64> = limit
        .network()
        .map(|net| {
            net.edges()
                .iter()
                .scan(0.0, |run, e| {
                    *run += e.length;
                    Some(*run)
                })
                .collect()
        })
        .unwrap_or_default();
    let mut out: Vec<(Located, Located)> = (0..opts.pairs)
        .map(|_| {
            let a = random_point(limit, &cumulative, &mut rng);
            let b = random_point(limit, &cumulative, &mut rng);
            (a, b)
        })
        .collect();
    if let Some(net) = limit.network() {
        let count = opts.probes.min(net.vertex_count());
        let probes: Vec<Located> = (0..count)
            .map(|k| {
                let v = k * net.vertex_count() / count;
                Located { at: net.vertices()[v], on: Some(net.vertex_point(v)) }
            })
            .collect();
        for i in 0..probes.len() {
            for j in i + 1..probes.len() {
                out.push((probes[i], probes[j]));
            }
        }
    }
    out
}

/// Checks convergence of intrinsic distances along nearest-point
/// sequences `a_n → a`, `b_n → b` for sampled limit pairs.
pub fn check_h2(seq: &SpaceSequence, opts: &H2Options) -> Result<H2Report> {
    if seq.levels.is_empty() {
        return Err(Error::InvalidParameter("sequence has no levels".into()));
    }
    if opts.pairs == 0 && opts.probes < 2 {
        return Err(Error::InvalidParameter("need at least one pair".into()));
    }
    let pairs = limit_pairs(&seq.limit, opts);
    let limit_d = pair_distances(&seq.limit, seq.ambient, &pairs)?;

    let mut level_d = Vec::with_capacity(seq.levels.len());
    for (n, space) in &seq.levels {
        let cloud = sample(space, opts.density)?;
        if cloud.is_empty() {
            return Err(Error::EmptySpace(format!("level {n} has no samples")));
        }
        let index = cloud.index();
        let snap = |p: &Located| -> Located {
            let (i, _) = index.nearest(&p.at, seq.ambient).expect("nonempty cloud");
            Located { at: cloud.points()[i], on: cloud.locations().map(|l| l[i]) }
        };
        let matched: Vec<(Located, Located)> = pairs.iter().map(|(a, b)| (snap(a), snap(b))).collect();
        level_d.push(pair_distances(space, seq.ambient, &matched)?);
    }

    let mut rows = Vec::with_capacity(seq.levels.len());
    for (k, (n, _)) in seq.levels.iter().enumerate() {
        let gaps: Vec<f64> = level_d[k].iter().zip(&limit_d).map(|(d, l)| (d - l).abs()).collect();
        let (mut worst, mut max_gap) = (0, f64::NEG_INFINITY);
        for (i, &g) in gaps.iter().enumerate() {
            if g > max_gap {
                (worst, max_gap) = (i, g);
            }
        }
        let cauchy_gap = level_d
            .get(k + 1)
            .map(|next| level_d[k].iter().zip(next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        rows.push(H2Row {
            n: *n,
            max_gap,
            mean_gap: gaps.iter().sum::<f64>() / gaps.len() as f64,
            witness_a: pairs[worst].0.at,
            witness_b: pairs[worst].1.at,
            cauchy_gap,
            verdict: if max_gap <= opts.tolerance { Verdict::Pass } else { Verdict::Fail },
        });
    }
    let (first, last) = (rows[0].max_gap, rows[rows.len() - 1].max_gap);
    let verdict = if last <= opts.tolerance && last <= first { Verdict::Pass } else { Verdict::Fail };
    Ok(H2Report { rows, pairs: pairs.len(), tolerance: opts.tolerance, verdict })
}
