use super::Run;
use crate::geometry::{weber_objective, FocusTriple, Metric, Point2};

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;
const MAX_RESTARTS: usize = 8;

/// Exact minimizer under the Manhattan metric: the objective separates into
/// `Σ wᵢ|x − xᵢ| + Σ wᵢ|y − yᵢ|`, each minimized by a weighted median.
pub(super) fn weighted_median(foci: &FocusTriple) -> Run {
    let weights = foci.weights();
    let positions = foci.positions();
    let xs = positions.map(|p| p.x);
    let ys = positions.map(|p| p.y);
    Run {
        point: Point2::new(median_1d(xs, weights), median_1d(ys, weights)),
        iterations: 1,
        residual: 0.0,
        converged: true,
    }
}

/// Weighted median of three values. When the half-weight mark falls exactly
/// between two values every point between them is optimal; the midpoint is
/// returned.
fn median_1d(values: [f64; 3], weights: [f64; 3]) -> f64 {
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let half = weights.iter().sum::<f64>() / 2.0;
    let mut acc = 0.0;
    for (rank, &i) in order.iter().enumerate() {
        acc += weights[i];
        if acc > half {
            return values[i];
        }
        if acc == half {
            return 0.5 * (values[i] + values[order[rank + 1]]);
        }
    }
    values[order[2]]
}

/// Nelder-Mead descent from the weighted centroid, restarted from the best
/// vertex until a fresh simplex no longer improves the value.
pub(super) fn nelder_mead(foci: &FocusTriple, metric: Metric, tol: f64, max_iter: usize) -> Run {
    let f = |m: Point2| weber_objective(m, foci, metric);
    let mut size = 0.1 * foci.diameter();
    if size == 0.0 {
        size = 1.0;
    }
    let mut best = foci.weighted_centroid();
    let mut best_value = f(best);
    let mut iterations = 0;
    let mut diameter = f64::INFINITY;

    for _ in 0..MAX_RESTARTS {
        let mut simplex = [best, best + Point2::new(size, 0.0), best + Point2::new(0.0, size)];
        let mut values = simplex.map(f);
        loop {
            sort_simplex(&mut simplex, &mut values);
            diameter = simplex_diameter(&simplex);
            if diameter < tol {
                break;
            }
            if iterations >= max_iter {
                return Run {
                    point: simplex[0],
                    iterations,
                    residual: diameter,
                    converged: false,
                };
            }
            iterations += 1;

            let centroid = (simplex[0] + simplex[1]) * 0.5;
            let worst = simplex[2];
            let reflected = centroid + (centroid - worst) * REFLECT;
            let fr = f(reflected);
            if fr < values[0] {
                let expanded = centroid + (reflected - centroid) * EXPAND;
                let fe = f(expanded);
                if fe < fr {
                    (simplex[2], values[2]) = (expanded, fe);
                } else {
                    (simplex[2], values[2]) = (reflected, fr);
                }
            } else if fr < values[1] {
                (simplex[2], values[2]) = (reflected, fr);
            } else {
                let (toward, f_toward) = if fr < values[2] {
                    (reflected, fr)
                } else {
                    (worst, values[2])
                };
                let contracted = centroid + (toward - centroid) * CONTRACT;
                let fc = f(contracted);
                if fc < f_toward {
                    (simplex[2], values[2]) = (contracted, fc);
                } else {
                    for i in 1..3 {
                        simplex[i] = simplex[0] + (simplex[i] - simplex[0]) * SHRINK;
                        values[i] = f(simplex[i]);
                    }
                }
            }
        }
        let improved = values[0] < best_value;
        if values[0] <= best_value {
            best = simplex[0];
            best_value = values[0];
        }
        if !improved {
            break;
        }
        // Restart smaller each round; a collapsed simplex can stall on a kink.
        size *= 0.1;
        if size < tol {
            size = 10.0 * tol;
        }
    }
    Run {
        point: best,
        iterations,
        residual: diameter,
        converged: true,
    }
}

fn sort_simplex(simplex: &mut [Point2; 3], values: &mut [f64; 3]) {
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    *simplex = order.map(|i| simplex[i]);
    *values = order.map(|i| values[i]);
}

fn simplex_diameter(simplex: &[Point2; 3]) -> f64 {
    simplex[0]
        .distance_to(simplex[1])
        .max(simplex[1].distance_to(simplex[2]))
        .max(simplex[2].distance_to(simplex[0]))
}
