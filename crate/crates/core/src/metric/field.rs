//! Refined node sets on a network and piecewise-linear fields over them.

use std::io::{Read, Write};
use std::sync::Arc;

use super::geometry::AmbientPoint;
use super::network::{MetricNetwork, NetPoint};
use super::shortest::{label_setting, Link};
use crate::error::{Error, Result};

/// Nodes placed along every edge of a network: all vertices (ids
/// `0..vertex_count`) followed by inserted edge-interior nodes.
#[derive(Clone, Debug)]
pub struct NodeGraph {
    network: Arc<MetricNetwork>,
    sites: Vec<NetPoint>,
    positions: Vec<AmbientPoint>,
    /// Per network edge: (offset, node) from the `a` end to the `b` end,
    /// both endpoints included.
    chains: Vec<Vec<(f64, usize)>>,
    adjacency: Vec<Vec<Link>>,
    max_gap: f64,
}

/// Where a network point falls relative to the node set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Located {
    Node(usize),
    /// Strictly between two consecutive nodes, at `t ∈ (0, 1)` from `left`;
    /// `gap` is the arclength between them.
    Between {
        left: usize,
        right: usize,
        t: f64,
        gap: f64,
    },
}

impl NodeGraph {
    /// Default refinement: a quarter of the shortest edge.
    pub fn default_spacing(net: &MetricNetwork) -> f64 {
        net.min_edge_length() / 4.0
    }

    /// Split every edge uniformly into pieces no longer than `spacing`, then
    /// insert `extra` points as additional nodes.
    pub fn refine(net: Arc<MetricNetwork>, spacing: f64, extra: &[NetPoint]) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidParameter(format!("node spacing {spacing}")));
        }
        for p in extra {
            net.validate_point(p)?;
        }
        let mut sites: Vec<NetPoint> = (0..net.vertex_count()).map(|v| net.vertex_point(v)).collect();
        let mut per_edge: Vec<Vec<f64>> = vec![Vec::new(); net.edge_count()];
        for (i, e) in net.edges().iter().enumerate() {
            let pieces = (e.length / spacing - 1e-9).ceil().max(1.0) as usize;
            per_edge[i].extend((1..pieces).map(|k| e.length * k as f64 / pieces as f64));
        }
        for p in extra {
            if net.as_vertex(p).is_none() {
                per_edge[p.edge].push(p.offset);
            }
        }
        for (i, offsets) in per_edge.iter_mut().enumerate() {
            offsets.sort_by(f64::total_cmp);
            let tol = 1e-12 * net.edges()[i].length;
            offsets.dedup_by(|b, a| (*b - *a).abs() <= tol);
            sites.extend(offsets.iter().map(|&offset| NetPoint { edge: i, offset }));
        }
        Self::from_sites(net, sites)
    }

    pub fn with_default_spacing(net: Arc<MetricNetwork>, extra: &[NetPoint]) -> Result<Self> {
        let h = Self::default_spacing(&net);
        Self::refine(net, h, extra)
    }

    /// Build from an explicit node list; node `v < vertex_count` must be
    /// vertex `v`, the rest distinct edge-interior points.
    pub fn from_sites(net: Arc<MetricNetwork>, sites: Vec<NetPoint>) -> Result<Self> {
        let nv = net.vertex_count();
        if sites.len() < nv {
            return Err(Error::InvalidParameter(format!("{} nodes given for {nv} vertices", sites.len())));
        }
        let mut chains: Vec<Vec<(f64, usize)>> =
            net.edges().iter().map(|e| vec![(0.0, e.a), (e.length, e.b)]).collect();
        for (i, p) in sites.iter().enumerate() {
            net.validate_point(p)?;
            match net.as_vertex(p) {
                Some(v) if v == i && i < nv => {}
                Some(_) => {
                    return Err(Error::InvalidParameter(format!("node {i} sits on a vertex out of order")))
                }
                None if i < nv => {
                    return Err(Error::InvalidParameter(format!("node {i} must be vertex {i}")))
                }
                None => {
                    let chain = &mut chains[p.edge];
                    let at = chain.len() - 1;
                    chain.insert(at, (p.offset, i));
                }
            }
        }
        let mut adjacency = vec![Vec::new(); sites.len()];
        let mut max_gap: f64 = 0.0;
        for (e, chain) in chains.iter_mut().enumerate() {
            let last = chain.len() - 1;
            chain[1..last].sort_by(|a, b| a.0.total_cmp(&b.0));
            for w in chain.windows(2) {
                let gap = w[1].0 - w[0].0;
                if gap <= 0.0 {
                    return Err(Error::InvalidParameter(format!("duplicate node on edge {e}")));
                }
                max_gap = max_gap.max(gap);
                adjacency[w[0].1].push(Link { to: w[1].1, length: gap, edge: e });
                adjacency[w[1].1].push(Link { to: w[0].1, length: gap, edge: e });
            }
        }
        let positions = sites.iter().map(|p| net.ambient_position(p)).collect::<Result<Vec<_>>>()?;
        Ok(Self { network: net, sites, positions, chains, adjacency, max_gap })
    }

    pub fn network(&self) -> &Arc<MetricNetwork> {
        &self.network
    }

    pub fn node_count(&self) -> usize {
        self.sites.len()
    }

    pub fn sites(&self) -> &[NetPoint] {
        &self.sites
    }

    pub fn positions(&self) -> &[AmbientPoint] {
        &self.positions
    }

    pub fn adjacency(&self) -> &[Vec<Link>] {
        &self.adjacency
    }

    pub fn chain(&self, edge: usize) -> &[(f64, usize)] {
        &self.chains[edge]
    }

    /// Longest arclength between consecutive nodes.
    pub fn max_gap(&self) -> f64 {
        self.max_gap
    }

    pub fn locate(&self, p: &NetPoint) -> Located {
        if let Some(v) = self.network.as_vertex(p) {
            return Located::Node(v);
        }
        let chain = &self.chains[p.edge];
        let k = chain.partition_point(|&(o, _)| o < p.offset);
        let (right_off, right) = chain[k];
        if right_off == p.offset {
            return Located::Node(right);
        }
        let (left_off, left) = chain[k - 1];
        let gap = right_off - left_off;
        Located::Between { left, right, t: (p.offset - left_off) / gap, gap }
    }

    pub fn node_at(&self, p: &NetPoint) -> Option<usize> {
        match self.locate(p) {
            Located::Node(i) => Some(i),
            Located::Between { .. } => None,
        }
    }

    /// Shortest-path seeds for a sweep starting at `p` with initial value
    /// `g`, weighting arclength by `scale`.
    pub fn seeds(&self, p: &NetPoint, g: f64, scale: f64) -> Vec<(usize, f64)> {
        match self.locate(p) {
            Located::Node(i) => vec![(i, g)],
            Located::Between { left, right, t, gap } => {
                vec![(left, g + scale * t * gap), (right, g + scale * (1.0 - t) * gap)]
            }
        }
    }

    /// Intrinsic distance from `p` to every node.
    pub fn distances_from(&self, p: &NetPoint) -> Vec<f64> {
        label_setting(&self.adjacency, &self.seeds(p, 0.0, 1.0), |l| l.length).dist
    }
}

/// Function values on the nodes of a [`NodeGraph`], linear in arclength
/// between consecutive nodes.
#[derive(Clone, Debug)]
pub struct ScalarField {
    graph: Arc<NodeGraph>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(graph: Arc<NodeGraph>, values: Vec<f64>) -> Result<Self> {
        if values.len() != graph.node_count() {
            return Err(Error::InvalidParameter(format!(
                "{} values for {} nodes",
                values.len(),
                graph.node_count()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite value at node {i}")));
        }
        Ok(Self { graph, values })
    }

    pub fn constant(graph: Arc<NodeGraph>, c: f64) -> Self {
        let values = vec![c; graph.node_count()];
        Self { graph, values }
    }

    pub fn graph(&self) -> &Arc<NodeGraph> {
        &self.graph
    }

    pub fn network(&self) -> &Arc<MetricNetwork> {
        self.graph.network()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, p: &NetPoint) -> f64 {
        match self.graph.locate(p) {
            Located::Node(i) => self.values[i],
            Located::Between { left, right, t, .. } => {
                self.values[left] + t * (self.values[right] - self.values[left])
            }
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { graph: self.graph.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Largest nodewise difference; both fields must share a node set.
    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        assert_eq!(self.values.len(), other.values.len(), "fields on different node sets");
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// `node,edge,offset,x,y,value`, one row per node.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["node", "edge", "offset", "x", "y", "value"])?;
        for (i, (site, pos)) in self.graph.sites.iter().zip(&self.graph.positions).enumerate() {
            w.write_record([
                i.to_string(),
                site.edge.to_string(),
                site.offset.to_string(),
                pos.x.to_string(),
                pos.y.to_string(),
                self.values[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Inverse of [`ScalarField::write_csv`]; lines starting with `#` are
    /// skipped.
    pub fn read_csv<R: Read>(net: Arc<MetricNetwork>, input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
        let mut rows: Vec<(usize, NetPoint, f64)> = Vec::new();
        for record in r.records() {
            let record = record?;
            let field = |k: usize| -> Result<&str> {
                record.get(k).ok_or_else(|| Error::InvalidParameter(format!("missing column {k}")))
            };
            let parse = |k: usize| -> Result<f64> {
                field(k)?.parse::<f64>().map_err(|e| Error::InvalidParameter(format!("column {k}: {e}")))
            };
            let node =
                field(0)?.parse::<usize>().map_err(|e| Error::InvalidParameter(format!("node id: {e}")))?;
            let edge =
                field(1)?.parse::<usize>().map_err(|e| Error::InvalidParameter(format!("edge id: {e}")))?;
            rows.push((node, NetPoint { edge, offset: parse(2)? }, parse(5)?));
        }
        rows.sort_by_key(|r| r.0);
        if rows.iter().enumerate().any(|(i, r)| r.0 != i) {
            return Err(Error::InvalidParameter("node ids are not 0..n".into()));
        }
        let sites = rows.iter().map(|r| r.1).collect();
        let values = rows.iter().map(|r| r.2).collect();
        let graph = Arc::new(NodeGraph::from_sites(net, sites)?);
        Self::new(graph, values)
    }
}

/// `u(x) = min_i (g_i + d(source_i, x))` on the default refinement, with
/// the sources inserted as nodes.
pub fn distance_field(net: &Arc<MetricNetwork>, sources: &[(NetPoint, f64)]) -> Result<ScalarField> {
    if sources.is_empty() {
        return Err(Error::EmptySources);
    }
    let points: Vec<NetPoint> = sources.iter().map(|s| s.0).collect();
    let graph = Arc::new(NodeGraph::with_default_spacing(net.clone(), &points)?);
    distance_field_on(&graph, sources)
}

/// [`distance_field`] on a given node set.
pub fn distance_field_on(graph: &Arc<NodeGraph>, sources: &[(NetPoint, f64)]) -> Result<ScalarField> {
    if sources.is_empty() {
        return Err(Error::EmptySources);
    }
    let mut seeds = Vec::new();
    for (p, g) in sources {
        if !g.is_finite() {
            return Err(Error::InvalidParameter(format!("source value {g}")));
        }
        graph.network().validate_point(p)?;
        seeds.extend(graph.seeds(p, *g, 1.0));
    }
    let labels = label_setting(graph.adjacency(), &seeds, |l| l.length);
    if !labels.all_reached() {
        return Err(Error::CorruptNetwork("disconnected node graph".into()));
    }
    ScalarField::new(graph.clone(), labels.dist)
}

/// Discrete local slope at scale `h`: the largest `|u(q) - u(p)| / h` over
/// the points `q` one step `h` away along every branch leaving `p`.
pub fn local_slope(u: &ScalarField, p: &NetPoint, h: f64) -> Result<f64> {
    let net = u.network();
    net.validate_point(p)?;
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidParameter(format!("slope step {h}")));
    }
    let here = u.value_at(p);
    let mut steps = Vec::new();
    match net.as_vertex(p) {
        Some(v) => {
            for link in &net.adjacency()[v] {
                let e = &net.edges()[link.edge];
                if h > e.length {
                    return Err(Error::StepTooLarge { h, remainder: e.length });
                }
                let offset = if e.a == v { h } else { e.length - h };
                steps.push(net.point(link.edge, offset)?);
            }
        }
        None => {
            let len = net.edges()[p.edge].length;
            let remainder = p.offset.min(len - p.offset);
            if h > remainder * (1.0 + 1e-12) {
                return Err(Error::StepTooLarge { h, remainder });
            }
            steps.push(net.point(p.edge, (p.offset - h).max(0.0))?);
            steps.push(net.point(p.edge, (p.offset + h).min(len))?);
        }
    }
    Ok(steps.iter().map(|q| (u.value_at(q) - here).abs() / h).fold(0.0, f64::max))
}

/// Local slopes at a schedule of step sizes, as `(h, slope)` pairs. Steps
/// too large for the local topology are skipped.
pub fn local_slope_schedule(u: &ScalarField, p: &NetPoint, steps: &[f64]) -> Vec<(f64, f64)> {
    steps.iter().filter_map(|&h| local_slope(u, p, h).ok().map(|s| (h, s))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Edge;

    fn interval(len: f64) -> Arc<MetricNetwork> {
        Arc::new(
            MetricNetwork::new(
                vec![AmbientPoint::new(0.0, 0.0), AmbientPoint::new(len, 0.0)],
                vec![Edge::new(0, 1, len)],
            )
            .unwrap(),
        )
    }

    /// Three unit arms from a centre vertex.
    fn star() -> Arc<MetricNetwork> {
        Arc::new(
            MetricNetwork::new(
                vec![
                    AmbientPoint::new(0.0, 0.0),
                    AmbientPoint::new(1.0, 0.0),
                    AmbientPoint::new(0.0, 1.0),
                    AmbientPoint::new(-1.0, 0.0),
                ],
                vec![Edge::new(0, 1, 1.0), Edge::new(0, 2, 1.0), Edge::new(0, 3, 1.0)],
            )
            .unwrap(),
        )
    }

    #[test]
    fn refinement_spacing_and_insertion() {
        let net = interval(1.0);
        let extra = net.point(0, 0.3).unwrap();
        let g = NodeGraph::refine(net.clone(), 0.25, &[extra]).unwrap();
        // 2 vertices, 3 uniform interior nodes, 1 inserted
        assert_eq!(g.node_count(), 6);
        assert!(g.max_gap() <= 0.25 + 1e-15);
        assert!(g.node_at(&extra).is_some());
        let offsets: Vec<f64> = g.chain(0).iter().map(|c| c.0).collect();
        assert_eq!(offsets, vec![0.0, 0.25, 0.3, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn distance_field_single_source() {
        let net = star();
        let a = net.point(0, 0.5).unwrap();
        let u = distance_field(&net, &[(a, 0.0)]).unwrap();
        for (site, &v) in u.graph().sites().iter().zip(u.values()) {
            let d = crate::metric::intrinsic_distance(&net, &a, site).unwrap();
            assert!((v - d).abs() < 1e-12);
        }
    }

    #[test]
    fn dominated_source_is_ignored() {
        let net = star();
        let a = net.point(1, 0.25).unwrap();
        let one = distance_field(&net, &[(a, 0.0)]).unwrap();
        let two = distance_field(&net, &[(a, 0.0), (a, 5.0)]).unwrap();
        assert_eq!(one.values(), two.values());
    }

    #[test]
    fn two_sources_on_interval() {
        // brute force over the two path choices: min(x, 1 - x)
        let net = interval(1.0);
        let u = distance_field(&net, &[(net.vertex_point(0), 0.0), (net.vertex_point(1), 0.0)]).unwrap();
        for k in 0..=100 {
            let x = k as f64 / 100.0;
            let p = net.point(0, x).unwrap();
            let oracle = [x, 1.0 - x].into_iter().fold(f64::INFINITY, f64::min);
            assert!((u.value_at(&p) - oracle).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn empty_sources_rejected() {
        assert!(matches!(distance_field(&interval(1.0), &[]), Err(Error::EmptySources)));
    }

    #[test]
    fn slope_of_distance_away_from_source() {
        let net = interval(2.0);
        let u = distance_field(&net, &[(net.vertex_point(0), 0.0)]).unwrap();
        let p = net.point(0, 1.3).unwrap();
        // brute force: difference quotients at every admissible step
        for h in [0.01, 0.05, 0.1, 0.5] {
            assert!((local_slope(&u, &p, h).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn slope_of_constant_is_zero() {
        let net = star();
        let g = Arc::new(NodeGraph::with_default_spacing(net.clone(), &[]).unwrap());
        let u = ScalarField::constant(g, 3.0);
        assert_eq!(local_slope(&u, &net.vertex_point(0), 0.1).unwrap(), 0.0);
        assert_eq!(local_slope(&u, &net.point(2, 0.4).unwrap(), 0.1).unwrap(), 0.0);
    }

    #[test]
    fn slope_at_the_peak_of_a_tent() {
        let net = interval(1.0);
        let u = distance_field(&net, &[(net.vertex_point(0), 0.0), (net.vertex_point(1), 0.0)]).unwrap();
        let p = net.point(0, 0.5).unwrap();
        assert!((local_slope(&u, &p, 0.1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oversized_step_is_signalled() {
        let net = interval(1.0);
        let u = distance_field(&net, &[(net.vertex_point(0), 0.0)]).unwrap();
        let p = net.point(0, 0.05).unwrap();
        assert!(matches!(local_slope(&u, &p, 0.1), Err(Error::StepTooLarge { .. })));
        let schedule = local_slope_schedule(&u, &p, &[0.01, 0.1]);
        assert_eq!(schedule.len(), 1);
    }

    #[test]
    fn csv_round_trip() {
        let net = star();
        let u = distance_field(&net, &[(net.point(2, 0.3).unwrap(), 0.5)]).unwrap();
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        let text = format!("# comment\n{}", String::from_utf8(buf).unwrap());
        let back = ScalarField::read_csv(net, text.as_bytes()).unwrap();
        assert_eq!(back.values(), u.values());
        assert_eq!(back.graph().sites(), u.graph().sites());
    }
}
