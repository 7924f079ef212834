//! Embedded geodesic networks and exact intrinsic-distance queries.

mod field;
mod geometry;
mod io;
mod network;
mod shortest;

pub use field::{
    distance_field, distance_field_on, local_slope, local_slope_schedule, Located, NodeGraph, ScalarField,
};
pub use geometry::{manhattan_distance, AmbientMetric, AmbientPoint};
pub use io::NetworkFile;
pub use network::{intrinsic_distance, Edge, MetricNetwork, NetPoint, PointDistances};
pub(crate) use shortest::State;
pub use shortest::{label_setting, label_setting_bounded, Labels, Link};
