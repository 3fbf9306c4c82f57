//! Minimizers of the weighted objective.
//!
//! [`torricelli_construct`] is the classical ruler-and-compass answer for
//! equal weights under the Euclidean metric; [`solve_weber`] handles any
//! weights and any Minkowski order.

mod simplex;
mod weiszfeld;

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{weber_objective, FocusTriple, Metric, Point2};

/// Relative tolerance for treating two foci as the same point.
const COINCIDENCE_TOL: f64 = 1e-12;
/// Tolerance on the angle cosine against cos(120°) = -1/2.
const ANGLE_COS_TOL: f64 = 1e-12;
/// Relative slack in the vertex-optimality test; a 120° vertex sits exactly on
/// the boundary and must resolve to the vertex.
const VERTEX_TEST_SLACK: f64 = 1e-12;

/// Side lengths and interior angles of the triangle spanned by three foci.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleGeometry {
    /// `[|BC|, |CA|, |AB|]`, i.e. the side opposite each vertex.
    pub sides: [f64; 3],
    /// Interior angles in degrees at A, B, C.
    pub angles: [f64; 3],
}

impl TriangleGeometry {
    pub fn of(foci: &FocusTriple) -> Self {
        let p = foci.positions();
        let sides = [p[1].distance_to(p[2]), p[2].distance_to(p[0]), p[0].distance_to(p[1])];
        let mut angles = [0.0; 3];
        for (i, angle) in angles.iter_mut().enumerate() {
            let u = p[(i + 1) % 3] - p[i];
            let v = p[(i + 2) % 3] - p[i];
            *angle = u.cross(v).abs().atan2(u.dot(v)).to_degrees();
        }
        TriangleGeometry { sides, angles }
    }

    /// Twice the signed area is `|cross|`; returns the unsigned area.
    pub fn area(&self, foci: &FocusTriple) -> f64 {
        let [a, b, c] = foci.positions();
        0.5 * (b - a).cross(c - a).abs()
    }

    pub fn circumradius(&self, foci: &FocusTriple) -> f64 {
        let [a, b, c] = self.sides;
        a * b * c / (4.0 * self.area(foci))
    }
}

/// Shape class of a focus triangle, as far as the Fermat point is concerned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangleClass {
    AllAnglesBelow120,
    /// The angle at `vertex` is 120° or more.
    AngleAtLeast120 {
        vertex: usize,
    },
    Collinear,
    /// Exactly two foci share a position.
    CoincidentPair {
        first: usize,
        second: usize,
    },
    AllCoincident,
}

pub fn classify_triangle(foci: &FocusTriple) -> TriangleClass {
    let p = foci.positions();
    let scale = foci.diameter();
    if scale == 0.0 {
        return TriangleClass::AllCoincident;
    }
    for (first, second) in [(0, 1), (1, 2), (0, 2)] {
        if p[first].distance_to(p[second]) <= COINCIDENCE_TOL * scale {
            return TriangleClass::CoincidentPair { first, second };
        }
    }
    if (p[1] - p[0]).cross(p[2] - p[0]).abs() <= COINCIDENCE_TOL * scale * scale {
        return TriangleClass::Collinear;
    }
    for vertex in 0..3 {
        let u = p[(vertex + 1) % 3] - p[vertex];
        let v = p[(vertex + 2) % 3] - p[vertex];
        let cos = u.dot(v) / (u.norm() * v.norm());
        if cos <= -0.5 + ANGLE_COS_TOL {
            return TriangleClass::AngleAtLeast120 { vertex };
        }
    }
    TriangleClass::AllAnglesBelow120
}

/// Apex of the equilateral triangle erected on `from -> to`, on the side
/// away from `opposite`.
fn outward_apex(from: Point2, to: Point2, opposite: Point2) -> Point2 {
    let edge = to - from;
    let side = edge.cross(opposite - from).signum();
    from + edge.rotated(-side * PI / 3.0)
}

/// Fermat point by intersecting two Simpson lines (each vertex joined to the
/// apex of the outward equilateral triangle on the opposite side).
///
/// Requires equal weights and a triangle whose angles are all below 120°.
pub fn torricelli_construct(foci: &FocusTriple) -> Result<Point2> {
    let [wa, wb, wc] = foci.weights();
    if wa != wb || wb != wc {
        return Err(Error::Precondition("construction requires equal weights".into()));
    }
    match classify_triangle(foci) {
        TriangleClass::AllAnglesBelow120 => {}
        other => {
            return Err(Error::Precondition(format!(
                "construction requires all angles below 120 degrees, triangle is {other:?}"
            )))
        }
    }
    let [a, b, c] = foci.positions();
    let a_apex = outward_apex(b, c, a);
    let b_apex = outward_apex(c, a, b);
    Ok(intersect_lines(a, a_apex, b, b_apex))
}

/// Simpson lines `[vertex, apex]` for each of A, B, C.
pub fn simpson_lines(foci: &FocusTriple) -> [(Point2, Point2); 3] {
    let [a, b, c] = foci.positions();
    [
        (a, outward_apex(b, c, a)),
        (b, outward_apex(c, a, b)),
        (c, outward_apex(a, b, c)),
    ]
}

fn intersect_lines(p: Point2, p_end: Point2, q: Point2, q_end: Point2) -> Point2 {
    let r = p_end - p;
    let s = q_end - q;
    let t = (q - p).cross(s) / r.cross(s);
    p + r * t
}

/// `max{a + b, b + c, c + a}` over the side lengths.
pub fn visschers_bound(foci: &FocusTriple) -> f64 {
    let [a, b, c] = TriangleGeometry::of(foci).sides;
    (a + b).max(b + c).max(c + a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Interior,
    /// The optimum is focus `index` itself.
    AtVertex(usize),
    /// Coincident foci: either all three coincide, or a pair does and the
    /// optimal set is the whole segment (midpoint returned).
    DegenerateCoincident,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveResult {
    pub point: Point2,
    pub s0: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    /// Final gradient norm (Weiszfeld) or simplex diameter (derivative-free).
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

impl SolveOptions {
    /// Step tolerance, floored at a few ulps of the coordinate magnitude.
    fn effective_tol(&self, foci: &FocusTriple) -> f64 {
        let magnitude = foci
            .positions()
            .iter()
            .map(|p| p.x.abs().max(p.y.abs()))
            .fold(foci.diameter(), f64::max);
        self.tol.max(64.0 * f64::EPSILON * magnitude)
    }
}

/// Minimizes `Σ wᵢ · d(m, fᵢ)`.
///
/// Euclidean metric: vertex-optimality test, then Weiszfeld iteration from
/// the weighted centroid. Other orders: exact weighted medians for p = 1,
/// Nelder-Mead simplex descent otherwise.
pub fn solve_weber(foci: &FocusTriple, metric: Metric, options: SolveOptions) -> Result<SolveResult> {
    if !(options.tol.is_finite() && options.tol > 0.0) {
        return Err(Error::invalid("tol", format!("must be positive, got {}", options.tol)));
    }
    if options.max_iter == 0 {
        return Err(Error::invalid("max_iter", "must be at least 1"));
    }
    let finish = |point: Point2, status, iterations, residual| SolveResult {
        point,
        s0: weber_objective(point, foci, metric),
        status,
        iterations,
        residual,
    };

    match classify_triangle(foci) {
        TriangleClass::AllCoincident => {
            return Ok(finish(foci.a.position, SolveStatus::DegenerateCoincident, 0, 0.0));
        }
        TriangleClass::CoincidentPair { first, second } => {
            let single = 3 - first - second;
            let w = foci.weights();
            let p = foci.positions();
            let merged = w[first] + w[second];
            let (point, status) = if merged > w[single] {
                (p[first], SolveStatus::AtVertex(first))
            } else if w[single] > merged {
                (p[single], SolveStatus::AtVertex(single))
            } else {
                ((p[first] + p[single]) * 0.5, SolveStatus::DegenerateCoincident)
            };
            return Ok(finish(point, status, 0, 0.0));
        }
        _ => {}
    }

    let tol = options.effective_tol(foci);
    if metric.is_euclidean() {
        if let Some(vertex) = optimal_vertex(foci) {
            let p = foci.positions()[vertex];
            return Ok(finish(p, SolveStatus::AtVertex(vertex), 0, 0.0));
        }
        let run = weiszfeld::iterate(foci, tol, options.max_iter);
        let result = finish(run.point, SolveStatus::Interior, run.iterations, run.residual);
        if run.converged {
            Ok(result)
        } else {
            Err(Error::NotConverged {
                iterations: run.iterations,
                residual: run.residual,
                best: Box::new(result),
            })
        }
    } else {
        let run = if metric.order_p() == 1.0 {
            simplex::weighted_median(foci)
        } else {
            simplex::nelder_mead(foci, metric, tol, options.max_iter)
        };
        let mut result = finish(run.point, SolveStatus::Interior, run.iterations, run.residual);
        // A focus that does at least as well as the descent result wins; this
        // also labels the vertex case exactly.
        for (index, p) in foci.positions().into_iter().enumerate() {
            let value = weber_objective(p, foci, metric);
            if p == run.point || value <= result.s0 {
                result = finish(p, SolveStatus::AtVertex(index), run.iterations, run.residual);
                break;
            }
        }
        if run.converged {
            Ok(result)
        } else {
            Err(Error::NotConverged {
                iterations: run.iterations,
                residual: run.residual,
                best: Box::new(result),
            })
        }
    }
}

/// A focus is the Euclidean minimizer iff the pull of the other two,
/// `‖Σ_{j≠i} wⱼ (fᵢ − fⱼ)/‖fᵢ − fⱼ‖‖`, does not exceed its own weight.
fn optimal_vertex(foci: &FocusTriple) -> Option<usize> {
    let p = foci.positions();
    let w = foci.weights();
    (0..3).find(|&i| {
        let pull = (0..3).filter(|&j| j != i).fold(Point2::ORIGIN, |acc, j| {
            let d = p[i] - p[j];
            acc + d * (w[j] / d.norm())
        });
        pull.norm() <= w[i] * (1.0 + VERTEX_TEST_SLACK)
    })
}

pub(crate) struct Run {
    pub point: Point2,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}
