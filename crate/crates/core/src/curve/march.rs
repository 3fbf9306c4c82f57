//! Marching squares over a sampled [`Grid`], with every edge crossing refined
//! by bisection on the true field.
//!
//! A node is *inside* when its value is below the level. Segments are oriented
//! with the inside on their left, so closed curves around a sublevel region
//! run counter-clockwise (y up). Saddle cells are split by the sign of the
//! field at the cell center.

use std::collections::{HashMap, HashSet};

use super::grid::Grid;
use super::LevelCurve;
use crate::exec::Execution;
use crate::geometry::Point2;

const MAX_BISECTIONS: usize = 200;

/// A grid edge: horizontal edges run from node `(i, j)` to `(i + 1, j)`,
/// vertical ones from `(i, j)` to `(i, j + 1)`. Ordering is row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct EdgeId(u64);

impl EdgeId {
    fn horizontal(i: usize, j: usize, nx: usize) -> Self {
        EdgeId(2 * (j * nx + i) as u64)
    }

    fn vertical(i: usize, j: usize, nx: usize) -> Self {
        EdgeId(2 * (j * nx + i) as u64 + 1)
    }

    fn endpoints(self, nx: usize) -> ((usize, usize), (usize, usize)) {
        let node = (self.0 / 2) as usize;
        let (i, j) = (node % nx, node / nx);
        if self.0.is_multiple_of(2) {
            ((i, j), (i + 1, j))
        } else {
            ((i, j), (i, j + 1))
        }
    }
}

pub(crate) struct Marcher<'a, F> {
    pub grid: &'a Grid,
    pub field: &'a F,
    pub level: f64,
    pub refine_tol: f64,
}

/// Corners and edges of cell `(i, j)` in counter-clockwise order; edge `k`
/// joins corner `k` to corner `k + 1`.
pub(crate) struct Cell {
    pub corners: [(usize, usize); 4],
    pub edges: [EdgeId; 4],
}

impl Cell {
    pub fn new(i: usize, j: usize, nx: usize) -> Self {
        Cell {
            corners: [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)],
            edges: [
                EdgeId::horizontal(i, j, nx),
                EdgeId::vertical(i + 1, j, nx),
                EdgeId::horizontal(i, j + 1, nx),
                EdgeId::vertical(i, j, nx),
            ],
        }
    }
}

impl<'a, F> Marcher<'a, F>
where
    F: Fn(Point2) -> f64 + Sync,
{
    pub fn inside(&self, node: (usize, usize)) -> bool {
        self.grid.at(node.0, node.1) < self.level
    }

    pub fn corner_states(&self, cell: &Cell) -> [bool; 4] {
        cell.corners.map(|c| self.inside(c))
    }

    pub fn is_saddle(states: [bool; 4]) -> bool {
        states == [true, false, true, false] || states == [false, true, false, true]
    }

    pub fn center_inside(&self, i: usize, j: usize) -> bool {
        let a = self.grid.bounds.node(i, j);
        let b = self.grid.bounds.node(i + 1, j + 1);
        (self.field)((a + b) * 0.5) < self.level
    }

    /// Oriented segments `(exit edge, entry edge)` crossing cell `(i, j)`.
    fn cell_segments(&self, i: usize, j: usize, out: &mut Vec<(EdgeId, EdgeId)>) {
        let nx = self.grid.bounds.nodes().0;
        let cell = Cell::new(i, j, nx);
        let s = self.corner_states(&cell);
        let exits = (0..4).filter(|&k| s[k] && !s[(k + 1) % 4]);
        let is_entry = |k: usize| !s[k] && s[(k + 1) % 4];
        if Self::is_saddle(s) {
            // Center inside joins the inside corners: each exit pairs with the
            // next entry. Otherwise each exit pairs with the previous one.
            let offset = if self.center_inside(i, j) { 1 } else { 3 };
            for k in exits {
                out.push((cell.edges[k], cell.edges[(k + offset) % 4]));
            }
        } else if let Some(k) = exits.into_iter().next() {
            let entry = (0..4).find(|&e| is_entry(e)).expect("one entry per exit");
            out.push((cell.edges[k], cell.edges[entry]));
        }
    }

    pub fn segments(&self, exec: Execution) -> Vec<(EdgeId, EdgeId)> {
        let (nx, ny) = self.grid.bounds.nodes();
        exec.map_range(ny - 1, |j| {
            let mut row = Vec::new();
            for i in 0..nx - 1 {
                self.cell_segments(i, j, &mut row);
            }
            row
        })
        .concat()
    }

    /// Refined crossing on every edge used by `segments`, sorted by edge.
    pub fn crossings(&self, segments: &[(EdgeId, EdgeId)], exec: Execution) -> Crossings {
        let mut edges: Vec<EdgeId> = segments.iter().flat_map(|&(a, b)| [a, b]).collect();
        edges.sort_unstable();
        edges.dedup();
        let points = exec.map_slice(&edges, |&e| self.refine(e));
        Crossings(edges.into_iter().zip(points).collect())
    }

    fn refine(&self, edge: EdgeId) -> Point2 {
        let nx = self.grid.bounds.nodes().0;
        let (n0, n1) = edge.endpoints(nx);
        let (lo, hi) = if self.inside(n0) { (n0, n1) } else { (n1, n0) };
        let (mut a, mut b) = (self.grid.bounds.node(lo.0, lo.1), self.grid.bounds.node(hi.0, hi.1));
        let mut ga = self.grid.at(lo.0, lo.1) - self.level;
        let mut gb = self.grid.at(hi.0, hi.1) - self.level;
        if ga.abs() <= self.refine_tol {
            return a;
        }
        if gb.abs() <= self.refine_tol {
            return b;
        }
        for _ in 0..MAX_BISECTIONS {
            let mid = (a + b) * 0.5;
            if mid == a || mid == b {
                break;
            }
            let g = (self.field)(mid) - self.level;
            if g.abs() <= self.refine_tol {
                return mid;
            }
            if g < 0.0 {
                (a, ga) = (mid, g);
            } else {
                (b, gb) = (mid, g);
            }
        }
        if ga.abs() <= gb.abs() {
            a
        } else {
            b
        }
    }
}

pub(crate) struct Crossings(Vec<(EdgeId, Point2)>);

impl Crossings {
    pub fn get(&self, edge: EdgeId) -> Point2 {
        let k = self
            .0
            .binary_search_by_key(&edge, |&(e, _)| e)
            .expect("crossing computed for every segment edge");
        self.0[k].1
    }
}

/// Joins oriented segments into polylines. Chains that start on the grid
/// border come first (open), then closed loops, each seeded from its smallest
/// edge so the output does not depend on segment order.
pub(crate) fn chain(segments: &[(EdgeId, EdgeId)], crossings: &Crossings, refine_tol: f64) -> Vec<LevelCurve> {
    let next: HashMap<EdgeId, EdgeId> = segments.iter().copied().collect();
    let ends: HashSet<EdgeId> = segments.iter().map(|&(_, e)| e).collect();
    let mut starts: Vec<EdgeId> = segments.iter().map(|&(s, _)| s).collect();
    starts.sort_unstable();

    let mut visited = HashSet::new();
    let mut curves = Vec::new();

    for &start in starts.iter().filter(|s| !ends.contains(s)) {
        let mut edges = vec![start];
        let mut cur = start;
        while let Some(&n) = next.get(&cur) {
            visited.insert(cur);
            edges.push(n);
            cur = n;
        }
        curves.push(build(&edges, crossings, false, refine_tol));
    }

    for &start in &starts {
        if visited.contains(&start) {
            continue;
        }
        let mut edges = Vec::new();
        let mut cur = start;
        let mut closed = false;
        loop {
            visited.insert(cur);
            edges.push(cur);
            match next.get(&cur) {
                Some(&n) if n == start => {
                    closed = true;
                    break;
                }
                Some(&n) if !visited.contains(&n) => cur = n,
                Some(&n) => {
                    edges.push(n);
                    break;
                }
                None => break,
            }
        }
        curves.push(build(&edges, crossings, closed, refine_tol));
    }
    curves.retain(|c| c.vertices.len() >= 2);
    curves
}

fn build(edges: &[EdgeId], crossings: &Crossings, closed: bool, refine_tol: f64) -> LevelCurve {
    let mut vertices: Vec<Point2> = Vec::with_capacity(edges.len());
    for &e in edges {
        let p = crossings.get(e);
        if vertices.last() != Some(&p) {
            vertices.push(p);
        }
    }
    if closed && vertices.len() > 1 && vertices.first() == vertices.last() {
        vertices.pop();
    }
    LevelCurve {
        vertices,
        closed,
        refine_tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::grid::GraphicBox;

    fn run<F: Fn(Point2) -> f64 + Sync>(field: F, bounds: GraphicBox, level: f64) -> Vec<LevelCurve> {
        let grid = Grid::sample(bounds, &field, Execution::Sequential);
        let m = Marcher {
            grid: &grid,
            field: &field,
            level,
            refine_tol: 1e-12,
        };
        let segs = m.segments(Execution::Sequential);
        let crossings = m.crossings(&segs, Execution::Sequential);
        chain(&segs, &crossings, 1e-12)
    }

    #[test]
    fn edge_ids_round_trip() {
        let nx = 7;
        assert_eq!(EdgeId::horizontal(3, 2, nx).endpoints(nx), ((3, 2), (4, 2)));
        assert_eq!(EdgeId::vertical(3, 2, nx).endpoints(nx), ((3, 2), (3, 3)));
    }

    #[test]
    fn single_inside_node_gives_ccw_diamond() {
        let bounds = GraphicBox::new(Point2::new(-1.0, -1.0), Point2::new(1.0, 1.0), 3).unwrap();
        let curves = run(|p: Point2| p.x.abs() + p.y.abs(), bounds, 0.5);
        assert_eq!(curves.len(), 1);
        let c = &curves[0];
        assert!(c.closed);
        assert_eq!(c.vertices.len(), 4);
        assert!(c.signed_area() > 0.0);
        assert!((c.signed_area() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn half_plane_is_open() {
        let bounds = GraphicBox::new(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0), 5).unwrap();
        let curves = run(|p: Point2| p.x, bounds, 0.3);
        assert_eq!(curves.len(), 1);
        assert!(!curves[0].closed);
        assert_eq!(curves[0].vertices.len(), 5);
        for v in &curves[0].vertices {
            assert!((v.x - 0.3).abs() < 1e-12);
        }
        // Inside (x < 0.3) on the left means walking upward.
        assert!(curves[0].vertices[0].y < curves[0].vertices[4].y);
    }

    #[test]
    fn saddle_follows_center_sign() {
        // Corners (0,0) and (1,1) low, the other two high.
        let bounds = GraphicBox::new(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0), 2).unwrap();
        let saddle = |p: Point2| (p.x - 0.5) * (p.y - 0.5) * -4.0 + 1.0;
        // Center value 1: inside for level 1.5, joining the low corners.
        let joined = run(saddle, bounds, 1.5);
        assert_eq!(joined.len(), 2);
        let split = run(saddle, bounds, 0.5);
        assert_eq!(split.len(), 2);
        // Joined: each curve cuts off a high corner (top-left or bottom-right).
        let near = |c: &LevelCurve, corner: Point2| c.vertices.iter().all(|v| v.distance_to(corner) < 0.75);
        let tl = Point2::new(0.0, 1.0);
        let bl = Point2::new(0.0, 0.0);
        assert!(joined.iter().any(|c| near(c, tl)));
        assert!(split.iter().any(|c| near(c, bl)));
    }
}
