use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("network file, line {line}: {message}")]
    NetworkFile { line: usize, message: String },

    #[error("corrupt network: {0}")]
    CorruptNetwork(String),

    #[error("edge id {0} out of range")]
    InvalidEdge(usize),

    #[error("offset {offset} outside [0, {length}] on edge {edge}")]
    OffsetOutOfRange { edge: usize, offset: f64, length: f64 },

    #[error("point ({x}, {y}) does not lie on the network")]
    PointNotOnNetwork { x: f64, y: f64 },

    #[error("no sources given")]
    EmptySources,

    #[error("step h = {h} exceeds the local edge remainder {remainder}")]
    StepTooLarge { h: f64, remainder: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("affine map {0} is not a similarity")]
    NotSimilarity(usize),

    #[error("affine map {0} is not a contraction")]
    NotContraction(usize),

    #[error("weld tolerance {tolerance} collapses distinct vertices of one edge")]
    WeldCollapse { tolerance: f64 },

    #[error("depth {n} is not supported for {kind} (max {max})")]
    UnsupportedDepth { kind: &'static str, n: usize, max: usize },

    #[error("mesh spacing {h_mesh} too coarse for tube half-width {half_width}")]
    MeshTooCoarse { h_mesh: f64, half_width: f64 },

    #[error("empty space: {0}")]
    EmptySpace(String),

    #[error("radius {radius} below capture bound {required} at level {level}")]
    CaptureCondition { level: usize, radius: f64, required: f64 },

    #[error("radius {radius} below node resolution {resolution}")]
    RadiusBelowResolution { radius: f64, resolution: f64 },

    #[error("no fixed point after {sweeps} sweeps (residual {residual:e})")]
    NotConverged { sweeps: usize, residual: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
