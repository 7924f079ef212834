//! Example spaces: prefractals, lattice lines, the Y-junction and its
//! meshed tubes, plus descriptors for building them by name.

mod curves;
mod descriptor;
mod fractals;
mod ifs;
mod junction;
mod lattice;

pub use curves::{arc, circle};
pub use descriptor::{Space, SpaceDescriptor, Window};
pub use fractals::{
    koch, koch_ifs, sierpinski_ifs, sierpinski_network, sierpinski_vertices, vicsek, vicsek_ifs, vicsek_seed,
    SIERPINSKI_CORNERS,
};
pub use ifs::{ifs_prefractal, AffineMap, IfsSystem, MAX_DEPTH, MAX_EDGES, WELD_FRACTION};
pub use junction::{y_junction, y_junction_tube, PlanarDomainMesh, JUNCTION_DIRECTIONS, STRETCH_CONSTANT};
pub use lattice::lattice_lines;
