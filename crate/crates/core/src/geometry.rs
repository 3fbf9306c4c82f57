//! Distance metrics and the weighted-sum objective field.
//!
//! Everything downstream (the solver, contouring, area estimation) samples the
//! scalar field `f(m) = Σ wᵢ · d(m, fᵢ)` defined here.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// Largest road-correction factor accepted by [`Metric::new`].
///
/// Road distances run 10-30% above straight-line ones.
pub const MAX_CORRECTION: f64 = 1.3;

/// A point in the plane, in abstract map units.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    /// Builds a point, rejecting non-finite coordinates.
    pub fn checked(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::invalid("point", format!("non-finite coordinate ({x}, {y})")));
        }
        Ok(Point2 { x, y })
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance_to(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    /// Rotates about the origin by `angle` radians, counter-clockwise.
    pub fn rotated(self, angle: f64) -> Point2 {
        let (s, c) = angle.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, k: f64) -> Point2 {
        Point2::new(self.x * k, self.y * k)
    }
}

impl From<(f64, f64)> for Point2 {
    fn from((x, y): (f64, f64)) -> Self {
        Point2::new(x, y)
    }
}

/// A focus: a location with a strictly positive weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Focus {
    pub position: Point2,
    weight: f64,
}

impl Focus {
    pub fn new(position: Point2, weight: f64) -> Result<Self> {
        if !position.is_finite() {
            return Err(Error::invalid("focus.position", "coordinates must be finite"));
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::invalid(
                "focus.weight",
                format!("must be positive and finite, got {weight}"),
            ));
        }
        Ok(Focus { position, weight })
    }

    /// A unit-weight focus at `(x, y)`. Panics on non-finite coordinates.
    pub fn unit(x: f64, y: f64) -> Self {
        Focus::new(Point2::new(x, y), 1.0).expect("finite focus coordinates")
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }
}

/// The three foci of a trifocal problem. Coincident or collinear positions
/// are legal; the solver classifies them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocusTriple {
    pub a: Focus,
    pub b: Focus,
    pub c: Focus,
}

impl FocusTriple {
    pub fn new(a: Focus, b: Focus, c: Focus) -> Self {
        FocusTriple { a, b, c }
    }

    /// Unit-weight foci at the given positions. Panics on non-finite input.
    pub fn unit(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> Self {
        FocusTriple::new(Focus::unit(a.0, a.1), Focus::unit(b.0, b.1), Focus::unit(c.0, c.1))
    }

    pub fn foci(&self) -> [Focus; 3] {
        [self.a, self.b, self.c]
    }

    pub fn positions(&self) -> [Point2; 3] {
        [self.a.position, self.b.position, self.c.position]
    }

    pub fn weights(&self) -> [f64; 3] {
        [self.a.weight, self.b.weight, self.c.weight]
    }

    pub fn total_weight(&self) -> f64 {
        self.a.weight + self.b.weight + self.c.weight
    }

    pub fn has_unit_weights(&self) -> bool {
        self.weights().iter().all(|&w| w == 1.0)
    }

    /// Same positions, weights multiplied by `factor`.
    pub fn scale_weights(&self, factor: f64) -> Result<Self> {
        let f = |focus: Focus| Focus::new(focus.position, focus.weight * factor);
        Ok(FocusTriple::new(f(self.a)?, f(self.b)?, f(self.c)?))
    }

    /// Applies `transform` to every position, keeping weights.
    pub fn map_positions(&self, mut transform: impl FnMut(Point2) -> Point2) -> Result<Self> {
        let mut f = |focus: Focus| Focus::new(transform(focus.position), focus.weight);
        Ok(FocusTriple::new(f(self.a)?, f(self.b)?, f(self.c)?))
    }

    pub fn weighted_centroid(&self) -> Point2 {
        let total = self.total_weight();
        let sum = self
            .foci()
            .iter()
            .fold(Point2::ORIGIN, |acc, f| acc + f.position * f.weight);
        sum * (1.0 / total)
    }

    /// Largest distance between any two foci (Euclidean).
    pub fn diameter(&self) -> f64 {
        let [a, b, c] = self.positions();
        a.distance_to(b).max(b.distance_to(c)).max(c.distance_to(a))
    }
}

/// Minkowski-p distance scaled by a road-correction factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metric {
    order_p: f64,
    correction: f64,
}

impl Default for Metric {
    fn default() -> Self {
        Metric::EUCLIDEAN
    }
}

impl Metric {
    pub const EUCLIDEAN: Metric = Metric {
        order_p: 2.0,
        correction: 1.0,
    };

    pub const MANHATTAN: Metric = Metric {
        order_p: 1.0,
        correction: 1.0,
    };

    pub fn new(order_p: f64, correction: f64) -> Result<Self> {
        if !(order_p.is_finite() && order_p >= 1.0) {
            return Err(Error::invalid(
                "metric.p",
                format!("order must be a finite value >= 1, got {order_p}"),
            ));
        }
        if !(1.0..=MAX_CORRECTION).contains(&correction) {
            return Err(Error::invalid(
                "metric.correction",
                format!("correction must lie in [1, {MAX_CORRECTION}], got {correction}"),
            ));
        }
        Ok(Metric { order_p, correction })
    }

    pub fn minkowski(order_p: f64) -> Result<Self> {
        Metric::new(order_p, 1.0)
    }

    pub fn order_p(&self) -> f64 {
        self.order_p
    }

    pub fn correction(&self) -> f64 {
        self.correction
    }

    pub fn is_euclidean(&self) -> bool {
        self.order_p == 2.0
    }

    /// Length of the vector `(dx, dy)` under this metric.
    pub fn length(&self, dx: f64, dy: f64) -> f64 {
        let (ax, ay) = (dx.abs(), dy.abs());
        let raw = if self.order_p == 1.0 {
            ax + ay
        } else if self.order_p == 2.0 {
            dx.hypot(dy)
        } else {
            // Scale by the larger component so |.|^p cannot overflow.
            let big = ax.max(ay);
            if big == 0.0 {
                0.0
            } else {
                let p = self.order_p;
                big * (1.0 + (ax.min(ay) / big).powf(p)).powf(1.0 / p)
            }
        };
        self.correction * raw
    }

    pub fn distance(&self, a: Point2, b: Point2) -> f64 {
        self.length(a.x - b.x, a.y - b.y)
    }
}

/// `correction · (|xa − xb|^p + |ya − yb|^p)^(1/p)`.
pub fn distance(a: Point2, b: Point2, metric: Metric) -> f64 {
    metric.distance(a, b)
}

/// The weighted-sum objective `Σ wᵢ · d(m, fᵢ)`.
pub fn weber_objective(m: Point2, foci: &FocusTriple, metric: Metric) -> f64 {
    foci.foci()
        .iter()
        .map(|f| f.weight * metric.distance(m, f.position))
        .sum()
}

/// Euclidean gradient of the objective, `Σ wᵢ · (m − fᵢ)/‖m − fᵢ‖`.
///
/// Fails at a focus, where the objective is not differentiable.
pub fn weber_gradient(m: Point2, foci: &FocusTriple) -> Result<Point2> {
    let mut grad = Point2::ORIGIN;
    for (index, f) in foci.foci().iter().enumerate() {
        let delta = m - f.position;
        let r = delta.norm();
        if r == 0.0 {
            return Err(Error::EvaluationAtFocus { index });
        }
        grad = grad + delta * (f.weight / r);
    }
    Ok(grad)
}

/// Euclidean distances and squared distances from `m` to each focus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluatedDistances {
    pub r: [f64; 3],
    pub q: [f64; 3],
}

pub fn evaluate_distances(m: Point2, foci: &FocusTriple) -> EvaluatedDistances {
    let mut r = [0.0; 3];
    let mut q = [0.0; 3];
    for (i, p) in foci.positions().iter().enumerate() {
        let d = m - *p;
        r[i] = d.norm();
        q[i] = r[i] * r[i];
    }
    EvaluatedDistances { r, q }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn equilateral() -> FocusTriple {
        FocusTriple::unit((0.0, 0.0), (1.0, 0.0), (0.5, 3f64.sqrt() / 2.0))
    }

    #[test]
    fn distance_examples() {
        let o = Point2::ORIGIN;
        assert_eq!(distance(o, Point2::new(3.0, 4.0), Metric::EUCLIDEAN), 5.0);
        assert_eq!(distance(o, Point2::new(1.0, 2.0), Metric::MANHATTAN), 3.0);
        let road = Metric::new(2.0, 1.2).unwrap();
        assert!((distance(o, Point2::new(3.0, 4.0), road) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn general_order_matches_direct_formula() {
        let m = Metric::minkowski(3.0).unwrap();
        let d = m.length(1.0, 2.0);
        assert!((d - 9f64.powf(1.0 / 3.0)).abs() < 1e-14);
        assert_eq!(m.length(0.0, 0.0), 0.0);
        assert!(m.length(1e300, 1e300).is_finite());
    }

    #[test]
    fn metric_rejects_bad_parameters() {
        assert!(Metric::new(0.5, 1.0).is_err());
        assert!(Metric::new(f64::INFINITY, 1.0).is_err());
        assert!(Metric::new(2.0, 0.9).is_err());
        assert!(Metric::new(2.0, 1.31).is_err());
        assert!(Metric::new(1.5, 1.3).is_ok());
    }

    #[test]
    fn focus_rejects_non_positive_weight() {
        assert!(Focus::new(Point2::ORIGIN, 0.0).is_err());
        assert!(Focus::new(Point2::ORIGIN, -1.0).is_err());
        assert!(Focus::new(Point2::ORIGIN, f64::NAN).is_err());
        assert!(Focus::new(Point2::new(f64::INFINITY, 0.0), 1.0).is_err());
        assert!(Point2::checked(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn objective_examples() {
        let tri = equilateral();
        let centroid = Point2::new(0.5, 1.0 / (2.0 * 3f64.sqrt()));
        assert!((weber_objective(centroid, &tri, Metric::EUCLIDEAN) - 3f64.sqrt()).abs() < 1e-15);

        let heavy_a = FocusTriple::new(Focus::new(tri.a.position, 2.0).unwrap(), tri.b, tri.c);
        assert!((weber_objective(tri.a.position, &heavy_a, Metric::EUCLIDEAN) - 2.0).abs() < 1e-15);

        let stacked = FocusTriple::unit((0.0, 0.0), (0.0, 0.0), (0.0, 0.0));
        assert_eq!(weber_objective(Point2::new(1.0, 0.0), &stacked, Metric::EUCLIDEAN), 3.0);
    }

    #[test]
    fn gradient_vanishes_at_centroid_and_fails_at_focus() {
        let tri = equilateral();
        let g = weber_gradient(Point2::new(0.5, 1.0 / (2.0 * 3f64.sqrt())), &tri).unwrap();
        assert!(g.norm() < 1e-15);
        assert_eq!(
            weber_gradient(tri.a.position, &tri),
            Err(Error::EvaluationAtFocus { index: 0 })
        );
    }

    #[test]
    fn evaluated_distances_examples() {
        let foci = FocusTriple::unit((1.0, 0.0), (0.0, 1.0), (0.0, 0.0));
        let d = evaluate_distances(Point2::ORIGIN, &foci);
        assert_eq!(d.r, [1.0, 1.0, 0.0]);
        assert_eq!(d.q, [1.0, 1.0, 0.0]);

        let foci = FocusTriple::unit((0.0, 0.0), (9.0, 9.0), (9.0, 9.0));
        let d = evaluate_distances(Point2::new(3.0, 4.0), &foci);
        assert_eq!((d.r[0], d.q[0]), (5.0, 25.0));
    }
}
