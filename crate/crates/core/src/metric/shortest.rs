//! Label-setting shortest paths with a binary heap.
//!
//! Heap entries are ordered by tentative distance, then by node id, so that
//! settling order (and therefore every tie) is deterministic.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Directed half of an undirected edge in an adjacency list.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Link {
    pub to: usize,
    pub length: f64,
    /// Network edge carrying this link.
    pub edge: usize,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct State {
    pub(crate) cost: f64,
    pub(crate) node: usize,
}

impl PartialEq for State {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (cost, node)
        other.cost.total_cmp(&self.cost).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Output of a multi-source label-setting sweep.
#[derive(Clone, Debug)]
pub struct Labels {
    /// Distance from the nearest source (including its initial offset);
    /// `f64::INFINITY` when unreachable.
    pub dist: Vec<f64>,
    /// Index into the seed list of the source realising `dist`.
    pub origin: Vec<usize>,
}

impl Labels {
    pub fn all_reached(&self) -> bool {
        self.dist.iter().all(|d| d.is_finite())
    }
}

/// Multi-source shortest paths over `adjacency`, starting from `seeds`
/// (node, initial distance). `weight` maps each link to its traversal cost.
pub fn label_setting<W>(adjacency: &[Vec<Link>], seeds: &[(usize, f64)], weight: W) -> Labels
where
    W: Fn(&Link) -> f64,
{
    label_setting_bounded(adjacency, seeds, f64::INFINITY, weight)
}

/// Like [`label_setting`], but nodes farther than `limit` are left at
/// infinity.
pub fn label_setting_bounded<W>(
    adjacency: &[Vec<Link>],
    seeds: &[(usize, f64)],
    limit: f64,
    weight: W,
) -> Labels
where
    W: Fn(&Link) -> f64,
{
    let n = adjacency.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut origin = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();

    for (i, &(node, d)) in seeds.iter().enumerate() {
        if d <= limit && d < dist[node] {
            dist[node] = d;
            origin[node] = i;
            heap.push(State { cost: d, node });
        }
    }

    while let Some(State { cost, node }) = heap.pop() {
        if done[node] || cost > dist[node] {
            continue;
        }
        done[node] = true;
        for link in &adjacency[node] {
            let next = cost + weight(link);
            if next > limit {
                continue;
            }
            let to = link.to;
            if next < dist[to] || (next == dist[to] && origin[node] < origin[to] && !done[to]) {
                dist[to] = next;
                origin[to] = origin[node];
                heap.push(State { cost: next, node: to });
            }
        }
    }

    Labels { dist, origin }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_graph(lengths: &[f64]) -> Vec<Vec<Link>> {
        let mut adj = vec![Vec::new(); lengths.len() + 1];
        for (e, &l) in lengths.iter().enumerate() {
            adj[e].push(Link { to: e + 1, length: l, edge: e });
            adj[e + 1].push(Link { to: e, length: l, edge: e });
        }
        adj
    }

    #[test]
    fn path_distances() {
        let adj = path_graph(&[1.0, 2.0, 0.5]);
        let labels = label_setting(&adj, &[(0, 0.0)], |l| l.length);
        assert_eq!(labels.dist, vec![0.0, 1.0, 3.0, 3.5]);
    }

    #[test]
    fn two_sources_split_the_path() {
        let adj = path_graph(&[1.0, 1.0, 1.0, 1.0]);
        let labels = label_setting(&adj, &[(0, 0.0), (4, 0.0)], |l| l.length);
        assert_eq!(labels.dist, vec![0.0, 1.0, 2.0, 1.0, 0.0]);
        // the tie at node 2 goes to the lower seed index
        assert_eq!(labels.origin, vec![0, 0, 0, 1, 1]);
    }

    #[test]
    fn bounded_leaves_far_nodes_unreached() {
        let adj = path_graph(&[1.0, 1.0, 1.0]);
        let labels = label_setting_bounded(&adj, &[(0, 0.0)], 1.5, |l| l.length);
        assert_eq!(labels.dist[1], 1.0);
        assert!(labels.dist[2].is_infinite());
        assert!(!labels.all_reached());
    }
}
