use super::Run;
use crate::geometry::{weber_gradient, weber_objective, FocusTriple, Metric, Point2};

/// Weiszfeld iteration from the weighted centroid, for the case where no
/// focus is optimal.
///
/// Each step also tries a Newton step on the objective and keeps whichever
/// lands lower, so convergence is quadratic near well-conditioned optima and
/// never worse than plain Weiszfeld. An iterate that lands exactly on a
/// (non-optimal) focus is moved off it with the Vardi-Zhang update.
pub(super) fn iterate(foci: &FocusTriple, tol: f64, max_iter: usize) -> Run {
    let objective = |m: Point2| weber_objective(m, foci, Metric::EUCLIDEAN);
    let positions = foci.positions();
    let weights = foci.weights();

    let mut x = foci.weighted_centroid();
    for iteration in 1..=max_iter {
        let next = match positions.iter().position(|&p| p == x) {
            Some(k) => vardi_zhang_step(x, k, &positions, &weights),
            None => {
                let weiszfeld = weiszfeld_step(x, &positions, &weights);
                match newton_step(x, &positions, &weights) {
                    Some(newton) if objective(newton) <= objective(weiszfeld) => newton,
                    _ => weiszfeld,
                }
            }
        };
        let step = next.distance_to(x);
        x = next;
        if step < tol {
            return Run {
                point: x,
                iterations: iteration,
                residual: residual(x, foci),
                converged: true,
            };
        }
    }
    Run {
        point: x,
        iterations: max_iter,
        residual: residual(x, foci),
        converged: false,
    }
}

fn residual(x: Point2, foci: &FocusTriple) -> f64 {
    weber_gradient(x, foci).map(|g| g.norm()).unwrap_or(0.0)
}

fn weiszfeld_step(x: Point2, positions: &[Point2; 3], weights: &[f64; 3]) -> Point2 {
    let mut num = Point2::ORIGIN;
    let mut den = 0.0;
    for (p, w) in positions.iter().zip(weights) {
        let coef = w / x.distance_to(*p);
        num = num + *p * coef;
        den += coef;
    }
    num * (1.0 / den)
}

fn newton_step(x: Point2, positions: &[Point2; 3], weights: &[f64; 3]) -> Option<Point2> {
    let (mut gx, mut gy) = (0.0, 0.0);
    let (mut hxx, mut hxy, mut hyy) = (0.0, 0.0, 0.0);
    for (p, w) in positions.iter().zip(weights) {
        let d = x - *p;
        let r = d.norm();
        let (ux, uy) = (d.x / r, d.y / r);
        gx += w * ux;
        gy += w * uy;
        let c = w / r;
        hxx += c * (1.0 - ux * ux);
        hxy -= c * ux * uy;
        hyy += c * (1.0 - uy * uy);
    }
    let det = hxx * hyy - hxy * hxy;
    if det.is_nan() || det <= 0.0 {
        return None;
    }
    let dx = (hyy * gx - hxy * gy) / det;
    let dy = (hxx * gy - hxy * gx) / det;
    let next = Point2::new(x.x - dx, x.y - dy);
    next.is_finite().then_some(next)
}

fn vardi_zhang_step(x: Point2, k: usize, positions: &[Point2; 3], weights: &[f64; 3]) -> Point2 {
    let mut num = Point2::ORIGIN;
    let mut den = 0.0;
    let mut pull = Point2::ORIGIN;
    for j in (0..3).filter(|&j| j != k) {
        let d = positions[j] - x;
        let r = d.norm();
        num = num + positions[j] * (weights[j] / r);
        den += weights[j] / r;
        pull = pull + d * (weights[j] / r);
    }
    let target = num * (1.0 / den);
    let ratio = weights[k] / pull.norm();
    target * (1.0 - ratio).max(0.0) + x * ratio.min(1.0)
}
