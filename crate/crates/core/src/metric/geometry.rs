use serde::{Deserialize, Serialize};

/// A point of the ambient plane.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct AmbientPoint {
    pub x: f64,
    pub y: f64,
}

impl AmbientPoint {
    pub const ORIGIN: AmbientPoint = AmbientPoint { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn euclidean(&self, other: &AmbientPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn manhattan(&self, other: &AmbientPoint) -> f64 {
        (self.x - other.x).abs() + (self.y - other.y).abs()
    }

    /// Point at parameter `t` on the segment from `self` to `other`.
    pub fn lerp(&self, other: &AmbientPoint, t: f64) -> AmbientPoint {
        AmbientPoint::new(self.x + (other.x - self.x) * t, self.y + (other.y - self.y) * t)
    }

    pub fn scale(&self, s: f64) -> AmbientPoint {
        AmbientPoint::new(self.x * s, self.y * s)
    }

    pub fn add(&self, other: &AmbientPoint) -> AmbientPoint {
        AmbientPoint::new(self.x + other.x, self.y + other.y)
    }

    pub fn sub(&self, other: &AmbientPoint) -> AmbientPoint {
        AmbientPoint::new(self.x - other.x, self.y - other.y)
    }

    pub fn dot(&self, other: &AmbientPoint) -> f64 {
        self.x * other.x + self.y * other.y
    }
}

impl From<[f64; 2]> for AmbientPoint {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<AmbientPoint> for [f64; 2] {
    fn from(p: AmbientPoint) -> Self {
        [p.x, p.y]
    }
}

impl std::fmt::Display for AmbientPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}", self.x, self.y)
    }
}

/// Metric of the ambient plane used for nearest-point matching and Hausdorff
/// distances.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmbientMetric {
    #[default]
    Euclidean,
    Manhattan,
}

impl AmbientMetric {
    pub fn distance(&self, a: &AmbientPoint, b: &AmbientPoint) -> f64 {
        match self {
            AmbientMetric::Euclidean => a.euclidean(b),
            AmbientMetric::Manhattan => a.manhattan(b),
        }
    }
}

/// `|x_b - x_a| + |y_b - y_a|`.
pub fn manhattan_distance(a: &AmbientPoint, b: &AmbientPoint) -> f64 {
    a.manhattan(b)
}
