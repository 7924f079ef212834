//! The named prefractal families: Vicsek, Sierpiński and Koch.

use std::collections::HashMap;

use super::ifs::{check_budget, ifs_prefractal, AffineMap, IfsSystem};
use crate::error::Result;
use crate::metric::{AmbientPoint, Edge, MetricNetwork};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Corners of the unit Sierpiński triangle.
pub const SIERPINSKI_CORNERS: [AmbientPoint; 3] =
    [AmbientPoint::new(-0.5, 0.0), AmbientPoint::new(0.5, 0.0), AmbientPoint::new(0.0, SQRT3 / 2.0)];

pub fn vicsek_ifs() -> IfsSystem {
    let third = 1.0 / 3.0;
    IfsSystem::new(vec![
        AffineMap::scaling(third, [0.0, 0.0]),
        AffineMap::scaling(third, [2.0, 0.0]),
        AffineMap::scaling(third, [0.0, 2.0]),
        AffineMap::scaling(third, [-2.0, 0.0]),
        AffineMap::scaling(third, [0.0, -2.0]),
    ])
    .expect("Vicsek maps are contracting similarities")
}

/// The cross `[-3, 3] × {0} ∪ {0} × [-3, 3]`: centre (vertex 0) joined to
/// the four tips.
pub fn vicsek_seed() -> MetricNetwork {
    MetricNetwork::new(
        vec![
            AmbientPoint::new(0.0, 0.0),
            AmbientPoint::new(-3.0, 0.0),
            AmbientPoint::new(3.0, 0.0),
            AmbientPoint::new(0.0, -3.0),
            AmbientPoint::new(0.0, 3.0),
        ],
        (1..5).map(|tip| Edge::new(0, tip, 3.0)).collect(),
    )
    .expect("valid seed")
}

pub fn vicsek(n: usize) -> Result<MetricNetwork> {
    check_budget("vicsek", n, 4, 5)?;
    ifs_prefractal(&vicsek_ifs(), &vicsek_seed(), n)
}

/// Koch maps. The third map is the rotation by −60° scaled by 1/3, so its
/// image joins the apex `(1/2, √3/6)` to `(2/3, 0)`.
pub fn koch_ifs() -> IfsSystem {
    let (a, b) = (1.0 / 6.0, SQRT3 / 6.0);
    IfsSystem::new(vec![
        AffineMap::scaling(1.0 / 3.0, [0.0, 0.0]),
        AffineMap::new([[a, -b], [b, a]], [1.0 / 3.0, 0.0]),
        AffineMap::new([[a, b], [-b, a]], [0.5, b]),
        AffineMap::scaling(1.0 / 3.0, [2.0 / 3.0, 0.0]),
    ])
    .expect("Koch maps are contracting similarities")
}

pub fn koch(n: usize) -> Result<MetricNetwork> {
    check_budget("koch", n, 1, 4)?;
    let seed = MetricNetwork::new(
        vec![AmbientPoint::new(0.0, 0.0), AmbientPoint::new(1.0, 0.0)],
        vec![Edge::new(0, 1, 1.0)],
    )?;
    ifs_prefractal(&koch_ifs(), &seed, n)
}

pub fn sierpinski_ifs() -> IfsSystem {
    IfsSystem::new(
        SIERPINSKI_CORNERS.iter().map(|o| AffineMap::scaling(0.5, [0.5 * o.x, 0.5 * o.y])).collect(),
    )
    .expect("Sierpiński maps are contracting similarities")
}

/// Network approximation `G_n`, grown from the boundary of the unit
/// triangle. The first corner is vertex 0 at every level.
pub fn sierpinski_network(n: usize) -> Result<MetricNetwork> {
    check_budget("sierpinski_network", n, 3, 3)?;
    let [o1, o2, o3] = SIERPINSKI_CORNERS;
    let seed = MetricNetwork::new(
        vec![o1, o2, o3],
        vec![Edge::new(0, 1, 1.0), Edge::new(1, 2, 1.0), Edge::new(2, 0, 1.0)],
    )?;
    ifs_prefractal(&sierpinski_ifs(), &seed, n)
}

/// Graph approximation `V_n`: the vertex set with adjacent vertices joined
/// by edges of length `2^-n`.
///
/// Built by enumerating level-`n` cells on the integer lattice spanned by
/// `O_2 - O_1` and `O_3 - O_1`, independently of the network iteration, so
/// vertex identification is exact.
pub fn sierpinski_vertices(n: usize) -> Result<MetricNetwork> {
    check_budget("sierpinski_vertices", n, 3, 3)?;
    let size = 1u64 << n;
    let step = 1.0 / size as f64;
    let [o1, o2, o3] = SIERPINSKI_CORNERS;
    let (u, v) = (o2.sub(&o1), o3.sub(&o1));

    let mut ids: HashMap<(u64, u64), usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    let mut id_of = |a: u64, b: u64, vertices: &mut Vec<AmbientPoint>| -> usize {
        *ids.entry((a, b)).or_insert_with(|| {
            let p = o1.add(&u.scale(a as f64 * step)).add(&v.scale(b as f64 * step));
            vertices.push(p);
            vertices.len() - 1
        })
    };

    // depth-first over cells (corner, side) in lattice units
    let mut stack = vec![(0u64, 0u64, size)];
    while let Some((a, b, s)) = stack.pop() {
        if s == 1 {
            let p = id_of(a, b, &mut vertices);
            let q = id_of(a + 1, b, &mut vertices);
            let r = id_of(a, b + 1, &mut vertices);
            edges.extend([Edge::new(p, q, step), Edge::new(q, r, step), Edge::new(r, p, step)]);
            continue;
        }
        let h = s / 2;
        stack.push((a, b + h, h));
        stack.push((a + h, b, h));
        stack.push((a, b, h));
    }
    MetricNetwork::new(vertices, edges)
}
