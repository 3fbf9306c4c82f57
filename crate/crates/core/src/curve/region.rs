//! Area of the sublevel region by cell counting: interior cells contribute
//! their full area, boundary cells the polygon cut off by the refined
//! crossings on their edges.

use super::march::{Cell, Crossings, Marcher};
use crate::exec::Execution;
use crate::geometry::Point2;

pub(crate) fn sublevel_area<F>(marcher: &Marcher<'_, F>, crossings: &Crossings, exec: Execution) -> f64
where
    F: Fn(Point2) -> f64 + Sync,
{
    let bounds = marcher.grid.bounds;
    let (nx, ny) = bounds.nodes();
    let rows = exec.map_range(ny - 1, |j| {
        (0..nx - 1).map(|i| cell_area(marcher, crossings, i, j)).sum::<f64>()
    });
    rows.iter().sum()
}

fn cell_area<F>(marcher: &Marcher<'_, F>, crossings: &Crossings, i: usize, j: usize) -> f64
where
    F: Fn(Point2) -> f64 + Sync,
{
    let bounds = marcher.grid.bounds;
    let cell = Cell::new(i, j, bounds.nodes().0);
    let states = marcher.corner_states(&cell);
    let corners = cell.corners.map(|(a, b)| bounds.node(a, b));
    match states.iter().filter(|&&s| s).count() {
        0 => return 0.0,
        4 => return (corners[2].x - corners[0].x) * (corners[2].y - corners[0].y),
        _ => {}
    }
    let crossing = |k: usize| crossings.get(cell.edges[k]);

    if Marcher::<F>::is_saddle(states) && !marcher.center_inside(i, j) {
        // Two separate corner triangles.
        return (0..4)
            .filter(|&k| states[k])
            .map(|k| polygon_area(&[corners[k], crossing(k), crossing((k + 3) % 4)]))
            .sum();
    }

    let mut polygon = Vec::with_capacity(6);
    for k in 0..4 {
        if states[k] {
            polygon.push(corners[k]);
        }
        if states[k] != states[(k + 1) % 4] {
            polygon.push(crossing(k));
        }
    }
    polygon_area(&polygon)
}

/// Shoelace area, positive for counter-clockwise vertex order.
pub(crate) fn polygon_area(vertices: &[Point2]) -> f64 {
    let n = vertices.len();
    if n < 3 {
        return 0.0;
    }
    let twice: f64 = (0..n).map(|k| vertices[k].cross(vertices[(k + 1) % n])).sum();
    0.5 * twice
}
