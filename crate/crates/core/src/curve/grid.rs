use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::Point2;

/// Rectangular sampling region with a node lattice.
///
/// `nx` and `ny` count grid nodes per axis, so a resolution of 2 is a single
/// cell with four corner samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphicBox {
    min: Point2,
    max: Point2,
    nx: usize,
    ny: usize,
}

impl GraphicBox {
    pub fn new(min: Point2, max: Point2, resolution: usize) -> Result<Self> {
        GraphicBox::with_nodes(min, max, resolution, resolution)
    }

    pub fn with_nodes(min: Point2, max: Point2, nx: usize, ny: usize) -> Result<Self> {
        if !min.is_finite() || !max.is_finite() {
            return Err(Error::invalid("box", "corners must be finite"));
        }
        if !(max.x > min.x && max.y > min.y) {
            return Err(Error::invalid("box", "max corner must exceed min corner on both axes"));
        }
        if nx < 2 || ny < 2 {
            return Err(Error::invalid(
                "resolution",
                format!("need at least 2 nodes per axis, got {nx}x{ny}"),
            ));
        }
        Ok(GraphicBox { min, max, nx, ny })
    }

    pub fn min(&self) -> Point2 {
        self.min
    }

    pub fn max(&self) -> Point2 {
        self.max
    }

    pub fn nodes(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    /// Same corners, square node lattice of the given resolution.
    pub fn with_resolution(&self, resolution: usize) -> Result<Self> {
        GraphicBox::new(self.min, self.max, resolution)
    }

    /// Same corners with the cell size halved on both axes.
    pub fn refined(&self) -> Self {
        GraphicBox {
            nx: 2 * (self.nx - 1) + 1,
            ny: 2 * (self.ny - 1) + 1,
            ..*self
        }
    }

    pub fn step(&self) -> (f64, f64) {
        (
            (self.max.x - self.min.x) / (self.nx - 1) as f64,
            (self.max.y - self.min.y) / (self.ny - 1) as f64,
        )
    }

    /// Larger of the two cell dimensions.
    pub fn grid_step(&self) -> f64 {
        let (dx, dy) = self.step();
        dx.max(dy)
    }

    /// Position of node `(i, j)`; the last node lands exactly on the max corner.
    pub fn node(&self, i: usize, j: usize) -> Point2 {
        Point2::new(
            lerp_index(self.min.x, self.max.x, i, self.nx),
            lerp_index(self.min.y, self.max.y, j, self.ny),
        )
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

fn lerp_index(lo: f64, hi: f64, i: usize, n: usize) -> f64 {
    if i + 1 == n {
        hi
    } else {
        lo + (hi - lo) * (i as f64 / (n - 1) as f64)
    }
}

/// Field values at every node of a box, row-major (`j * nx + i`).
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Grid {
    pub bounds: GraphicBox,
    pub values: Vec<f64>,
}

impl Grid {
    pub fn sample<F>(bounds: GraphicBox, field: &F, exec: Execution) -> Grid
    where
        F: Fn(Point2) -> f64 + Sync,
    {
        let (nx, ny) = bounds.nodes();
        let rows = exec.map_range(ny, |j| (0..nx).map(|i| field(bounds.node(i, j))).collect::<Vec<_>>());
        Grid {
            bounds,
            values: rows.concat(),
        }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.bounds.nx + i]
    }

    /// Smallest value over the outer ring of nodes.
    pub fn boundary_min(&self) -> f64 {
        let (nx, ny) = self.bounds.nodes();
        let rows = (0..nx).flat_map(|i| [self.at(i, 0), self.at(i, ny - 1)]);
        let cols = (0..ny).flat_map(|j| [self.at(0, j), self.at(nx - 1, j)]);
        rows.chain(cols).fold(f64::INFINITY, f64::min)
    }
}

/// Objective sampled over a box, with the extreme nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub bounds: GraphicBox,
    /// Row-major node values, `values[j * nx + i]`.
    pub values: Vec<f64>,
    pub min_point: Point2,
    pub min_value: f64,
    pub max_point: Point2,
    pub max_value: f64,
}

impl FieldSample {
    pub(crate) fn from_grid(grid: Grid) -> Self {
        let (nx, _) = grid.bounds.nodes();
        // First occurrence wins on ties, so the result is order-independent.
        let (mut lo, mut hi) = (0, 0);
        for (k, &v) in grid.values.iter().enumerate() {
            if v < grid.values[lo] {
                lo = k;
            }
            if v > grid.values[hi] {
                hi = k;
            }
        }
        let point = |k: usize| grid.bounds.node(k % nx, k / nx);
        FieldSample {
            min_point: point(lo),
            min_value: grid.values[lo],
            max_point: point(hi),
            max_value: grid.values[hi],
            bounds: grid.bounds,
            values: grid.values,
        }
    }

    pub fn value_at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.bounds.nx + i]
    }
}
