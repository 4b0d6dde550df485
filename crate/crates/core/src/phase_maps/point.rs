use serde::{Deserialize, Serialize};

/// The two phase spaces supported: the circle ℝ/ℤ and the torus ℝ²/ℤ².
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Circle,
    Torus,
}

impl Space {
    pub fn dim(self) -> usize {
        match self {
            Space::Circle => 1,
            Space::Torus => 2,
        }
    }

    /// Diameter of the quotient metric.
    pub fn diameter(self) -> f64 {
        match self {
            Space::Circle => 0.5,
            Space::Torus => std::f64::consts::FRAC_1_SQRT_2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Space::Circle => "circle",
            Space::Torus => "torus",
        }
    }
}

/// Reduce a real number to [0, 1).
#[inline]
pub fn wrap(x: f64) -> f64 {
    let r = x - x.floor();
    // x - floor(x) rounds up to 1.0 for tiny negative x
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Signed representative of x mod 1 in [-1/2, 1/2).
#[inline]
pub fn wrap_signed(x: f64) -> f64 {
    x - (x + 0.5).floor()
}

/// Quotient distance on ℝ/ℤ.
#[inline]
pub fn circle_dist(x: f64, y: f64) -> f64 {
    wrap_signed(x - y).abs()
}

/// A point of S¹ or T², coordinates normalized to [0, 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Point {
    Circle(f64),
    Torus([f64; 2]),
}

impl Point {
    pub fn circle(x: f64) -> Self {
        Point::Circle(wrap(x))
    }

    pub fn torus(x: f64, y: f64) -> Self {
        Point::Torus([wrap(x), wrap(y)])
    }

    pub fn space(&self) -> Space {
        match self {
            Point::Circle(_) => Space::Circle,
            Point::Torus(_) => Space::Torus,
        }
    }

    pub fn coords(&self) -> &[f64] {
        match self {
            Point::Circle(x) => std::slice::from_ref(x),
            Point::Torus(v) => v,
        }
    }

    /// First coordinate; the only one on the circle.
    pub fn x(&self) -> f64 {
        match *self {
            Point::Circle(x) => x,
            Point::Torus([x, _]) => x,
        }
    }

    pub fn normalized(&self) -> Self {
        match *self {
            Point::Circle(x) => Point::circle(x),
            Point::Torus([x, y]) => Point::torus(x, y),
        }
    }

    /// Quotient metric: minimum over integer translates of the Euclidean distance.
    ///
    /// Panics if the points live on different spaces.
    pub fn dist(&self, other: &Point) -> f64 {
        match (self, other) {
            (Point::Circle(a), Point::Circle(b)) => circle_dist(*a, *b),
            (Point::Torus(a), Point::Torus(b)) => {
                let dx = wrap_signed(a[0] - b[0]);
                let dy = wrap_signed(a[1] - b[1]);
                dx.hypot(dy)
            }
            _ => panic!("distance between points on different phase spaces"),
        }
    }

    /// Translate by a displacement and renormalize.
    pub fn offset(&self, delta: &[f64]) -> Point {
        match *self {
            Point::Circle(x) => Point::circle(x + delta[0]),
            Point::Torus([x, y]) => Point::torus(x + delta[0], y + delta[1]),
        }
    }
}

/// Uniform grid of `resolution` points per axis, in row-major order.
pub fn grid_points(space: Space, resolution: usize) -> Vec<Point> {
    let h = 1.0 / resolution as f64;
    match space {
        Space::Circle => (0..resolution).map(|i| Point::Circle(i as f64 * h)).collect(),
        Space::Torus => (0..resolution)
            .flat_map(|i| (0..resolution).map(move |j| Point::Torus([i as f64 * h, j as f64 * h])))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_handles_tiny_negatives() {
        assert_eq!(wrap(-1e-300), 0.0);
        assert_eq!(wrap(1.25), 0.25);
        assert_eq!(wrap(-0.25), 0.75);
    }

    #[test]
    fn circle_distance_is_quotient_metric() {
        assert!((circle_dist(0.1, 0.9) - 0.2).abs() < 1e-15);
        assert!((circle_dist(0.0, 0.5) - 0.5).abs() < 1e-15);
        let p = Point::torus(0.0, 0.0);
        let q = Point::torus(0.5, 0.5);
        assert!((p.dist(&q) - Space::Torus.diameter()).abs() < 1e-15);
    }
}
