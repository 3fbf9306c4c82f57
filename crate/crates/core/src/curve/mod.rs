//! Level sets of the weighted objective: existence, the degree-8 implicit
//! form, contour extraction, isolines, and area/perimeter estimates.

mod grid;
mod march;
mod region;

pub use grid::{FieldSample, GraphicBox};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fermat::{solve_weber, SolveOptions, SolveResult};
use crate::geometry::{evaluate_distances, weber_objective, FocusTriple, Metric, Point2};
use grid::Grid;
use march::Marcher;

/// Default bisection tolerance relative to the level.
pub const DEFAULT_REFINE_REL: f64 = 1e-9;
/// Default node count per axis for region metrics.
pub const DEFAULT_BASE_RESOLUTION: usize = 256;

/// A level `s` paired with the minimum `s0` of the objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelParameter {
    pub s: f64,
    pub s0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelClass {
    Empty,
    SinglePoint,
    Curve,
}

impl LevelParameter {
    pub fn classify(&self) -> LevelClass {
        classify_level(*self)
    }
}

/// `s < s0` has no level curve, `s = s0` is the minimizer alone, anything
/// larger is a closed convex curve. Equality is within `1e-9 · max(1, s0)`.
pub fn classify_level(lp: LevelParameter) -> LevelClass {
    let eps = 1e-9 * lp.s0.max(1.0);
    if lp.s < lp.s0 - eps {
        LevelClass::Empty
    } else if (lp.s - lp.s0).abs() <= eps {
        LevelClass::SinglePoint
    } else {
        LevelClass::Curve
    }
}

/// `64 s² Q₁Q₂Q₃ − P²` where
/// `P = s⁴ − 2s²(Q₁+Q₂+Q₃) + Q₁² + Q₂² + Q₃² − 2(Q₁Q₂ + Q₂Q₃ + Q₃Q₁)`,
/// the polynomial obtained by squaring `R_A + R_B + R_C = s` three times.
///
/// It vanishes on the unit-weight Euclidean level curve (and on the spurious
/// branches the squaring introduces). Weighted triples are rejected.
pub fn implicit_residual(m: Point2, foci: &FocusTriple, s: f64) -> Result<f64> {
    if !foci.has_unit_weights() {
        return Err(Error::Precondition(
            "implicit form is derived for unit weights only".into(),
        ));
    }
    let [q1, q2, q3] = evaluate_distances(m, foci).q;
    let s2 = s * s;
    let p = s2 * s2 - 2.0 * s2 * (q1 + q2 + q3) + q1 * q1 + q2 * q2 + q3 * q3 - 2.0 * (q1 * q2 + q2 * q3 + q3 * q1);
    Ok(64.0 * s2 * q1 * q2 * q3 - p * p)
}

/// Residual of [`implicit_residual`] after scaling coordinates so that the
/// level is 1; the polynomial is homogeneous of degree 8.
pub fn normalized_implicit_residual(m: Point2, foci: &FocusTriple, s: f64) -> Result<f64> {
    Ok(implicit_residual(m, foci, s)? / s.powi(8))
}

/// Closed (or box-clipped) polyline approximating a level curve. Every vertex
/// satisfies `|f(v) − s| ≤ refine_tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelCurve {
    pub vertices: Vec<Point2>,
    pub closed: bool,
    pub refine_tol: f64,
}

impl LevelCurve {
    pub fn length(&self) -> f64 {
        let open: f64 = self.vertices.windows(2).map(|w| w[0].distance_to(w[1])).sum();
        match (self.closed, self.vertices.first(), self.vertices.last()) {
            (true, Some(first), Some(last)) => open + last.distance_to(*first),
            _ => open,
        }
    }

    /// Shoelace area; positive when the vertices run counter-clockwise.
    pub fn signed_area(&self) -> f64 {
        region::polygon_area(&self.vertices)
    }

    /// Even-odd point-in-polygon test against the closed polyline.
    pub fn contains(&self, p: Point2) -> bool {
        let v = &self.vertices;
        let mut inside = false;
        let mut j = v.len().wrapping_sub(1);
        for i in 0..v.len() {
            let (a, b) = (v[i], v[j]);
            if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
                inside = !inside;
            }
            j = i;
        }
        inside
    }
}

/// Area and perimeter of `{f ≤ s}` with two-resolution error estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionMetrics {
    pub area: f64,
    pub perimeter: f64,
    /// Half the change in area between the base and the refined grid.
    pub area_error: f64,
    pub perimeter_error: f64,
    /// Cell size of the refined grid.
    pub grid_step: f64,
}

/// Level-set machinery bound to one focus configuration and metric.
///
/// Construction solves for the minimizer once; its value `s0` decides which
/// levels have curves.
#[derive(Debug, Clone)]
pub struct CurveEngine {
    foci: FocusTriple,
    metric: Metric,
    solution: SolveResult,
    exec: Execution,
}

impl CurveEngine {
    /// Solves with default options. A solve that hits its iteration cap still
    /// yields an engine built on the best iterate.
    pub fn new(foci: FocusTriple, metric: Metric) -> Result<Self> {
        let solution = match solve_weber(&foci, metric, SolveOptions::default()) {
            Ok(r) => r,
            Err(Error::NotConverged { best, .. }) => *best,
            Err(e) => return Err(e),
        };
        Ok(CurveEngine::with_solution(foci, metric, solution))
    }

    pub fn with_solution(foci: FocusTriple, metric: Metric, solution: SolveResult) -> Self {
        CurveEngine {
            foci,
            metric,
            solution,
            exec: Execution::default(),
        }
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn foci(&self) -> &FocusTriple {
        &self.foci
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn solution(&self) -> &SolveResult {
        &self.solution
    }

    pub fn s0(&self) -> f64 {
        self.solution.s0
    }

    pub fn objective(&self, m: Point2) -> f64 {
        weber_objective(m, &self.foci, self.metric)
    }

    pub fn level(&self, s: f64) -> LevelParameter {
        LevelParameter { s, s0: self.s0() }
    }

    fn require_curve(&self, s: f64) -> Result<()> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::invalid(
                "s",
                format!("level must be positive and finite, got {s}"),
            ));
        }
        let s0 = self.s0();
        match classify_level(self.level(s)) {
            LevelClass::Curve => Ok(()),
            LevelClass::Empty => Err(Error::LevelBelowMinimum { s, s0 }),
            LevelClass::SinglePoint => Err(Error::LevelDegenerate { s, s0 }),
        }
    }

    fn sample(&self, bounds: GraphicBox) -> Grid {
        let field = |m: Point2| self.objective(m);
        Grid::sample(bounds, &field, self.exec)
    }

    /// Objective at every node of `bounds`, with the extreme nodes.
    pub fn sample_field(&self, bounds: &GraphicBox) -> FieldSample {
        FieldSample::from_grid(self.sample(*bounds))
    }

    /// Level curves `f = s` inside `bounds`. Curves cut by the box border come
    /// back open. `refine_tol` defaults to `1e-9 · s`.
    pub fn extract_contour(&self, bounds: &GraphicBox, s: f64, refine_tol: Option<f64>) -> Result<Vec<LevelCurve>> {
        self.require_curve(s)?;
        let tol = self.refine_tol(s, refine_tol)?;
        let grid = self.sample(*bounds);
        Ok(self.contour_grid(&grid, s, tol).0)
    }

    fn refine_tol(&self, s: f64, requested: Option<f64>) -> Result<f64> {
        match requested {
            None => Ok(DEFAULT_REFINE_REL * s),
            Some(t) if t.is_finite() && t > 0.0 => Ok(t),
            Some(t) => Err(Error::invalid("refine_tol", format!("must be positive, got {t}"))),
        }
    }

    fn contour_grid(&self, grid: &Grid, s: f64, refine_tol: f64) -> (Vec<LevelCurve>, f64) {
        let field = |m: Point2| self.objective(m);
        let marcher = Marcher {
            grid,
            field: &field,
            level: s,
            refine_tol,
        };
        let segments = marcher.segments(self.exec);
        let crossings = marcher.crossings(&segments, self.exec);
        let curves = march::chain(&segments, &crossings, refine_tol);
        let area = region::sublevel_area(&marcher, &crossings, self.exec);
        (curves, area)
    }

    /// One entry per requested level, in order. Levels without a curve
    /// (below or at the minimum) map to an empty list.
    pub fn isoline_set(&self, bounds: &GraphicBox, levels: &[f64]) -> Vec<(f64, Vec<LevelCurve>)> {
        let grid = self.sample(*bounds);
        levels
            .iter()
            .map(|&s| {
                let curves = if s.is_finite() && classify_level(self.level(s)) == LevelClass::Curve {
                    self.contour_grid(&grid, s, DEFAULT_REFINE_REL * s).0
                } else {
                    Vec::new()
                };
                (s, curves)
            })
            .collect()
    }

    /// Area and perimeter of `{f ≤ s}` on `bounds` at `base_resolution` nodes
    /// per axis and on the grid with half the cell size; the finer values are
    /// reported, errors are half their differences.
    pub fn region_metrics(&self, bounds: &GraphicBox, s: f64, base_resolution: usize) -> Result<RegionMetrics> {
        self.require_curve(s)?;
        let coarse = bounds.with_resolution(base_resolution)?;
        let fine = coarse.refined();
        let (area_coarse, perimeter_coarse) = self.area_perimeter(coarse, s)?;
        let (area, perimeter) = self.area_perimeter(fine, s)?;
        Ok(RegionMetrics {
            area,
            perimeter,
            area_error: (area - area_coarse).abs() / 2.0,
            perimeter_error: (perimeter - perimeter_coarse).abs() / 2.0,
            grid_step: fine.grid_step(),
        })
    }

    fn area_perimeter(&self, bounds: GraphicBox, s: f64) -> Result<(f64, f64)> {
        let grid = self.sample(bounds);
        let boundary_value = grid.boundary_min();
        if boundary_value <= s {
            return Err(Error::RegionNotContained { s, boundary_value });
        }
        let (curves, area) = self.contour_grid(&grid, s, DEFAULT_REFINE_REL * s);
        Ok((area, curves.iter().map(LevelCurve::length).sum()))
    }

    /// A box holding `{f ≤ s}` with a margin, found from a coarse scan and
    /// widened until its border samples all exceed `s`.
    pub fn fitted_box(&self, s: f64, resolution: usize) -> Result<GraphicBox> {
        self.require_curve(s)?;
        // Each term alone bounds the region: wᵢ·corr·‖m − fᵢ‖∞ ≤ s.
        let mut lo = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        let mut hi = Point2::new(f64::INFINITY, f64::INFINITY);
        for f in self.foci.foci() {
            let r = s / (f.weight() * self.metric.correction());
            lo = Point2::new(lo.x.max(f.position.x - r), lo.y.max(f.position.y - r));
            hi = Point2::new(hi.x.min(f.position.x + r), hi.y.min(f.position.y + r));
        }
        const SCAN: usize = 65;
        let loose = GraphicBox::new(lo, hi, SCAN)?;
        let scan = self.sample(loose);
        let (mut min, mut max) = (self.solution.point, self.solution.point);
        for j in 0..SCAN {
            for i in 0..SCAN {
                if scan.at(i, j) <= s {
                    let p = loose.node(i, j);
                    min = Point2::new(min.x.min(p.x), min.y.min(p.y));
                    max = Point2::new(max.x.max(p.x), max.y.max(p.y));
                }
            }
        }
        let (dx, dy) = loose.step();
        let mut pad = Point2::new(2.0 * dx, 2.0 * dy);
        for _ in 0..32 {
            let candidate = GraphicBox::new(min - pad, max + pad, resolution)?;
            if self.sample(candidate).boundary_min() > s {
                return Ok(candidate);
            }
            pad = pad * 2.0;
        }
        Err(Error::RegionNotContained {
            s,
            boundary_value: f64::NAN,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn equilateral() -> FocusTriple {
        FocusTriple::unit((0.0, 0.0), (1.0, 0.0), (0.5, 3f64.sqrt() / 2.0))
    }

    #[test]
    fn classify_examples() {
        let s0 = 3f64.sqrt();
        assert_eq!(classify_level(LevelParameter { s: 0.5 * s0, s0 }), LevelClass::Empty);
        assert_eq!(classify_level(LevelParameter { s: s0, s0 }), LevelClass::SinglePoint);
        assert_eq!(classify_level(LevelParameter { s: 2.0 * s0, s0 }), LevelClass::Curve);
        assert_eq!(
            classify_level(LevelParameter { s: 0.0, s0: 0.0 }),
            LevelClass::SinglePoint
        );
    }

    #[test]
    fn implicit_residual_vanishes_for_stacked_foci() {
        let foci = FocusTriple::unit((0.0, 0.0), (0.0, 0.0), (0.0, 0.0));
        for s in [0.3, 1.0, 3.0, 17.0] {
            for angle in [0.0, 0.7, 2.0, 4.1] {
                let m = Point2::new(s / 3.0, 0.0).rotated(angle);
                let r = normalized_implicit_residual(m, &foci, s).unwrap();
                assert!(r.abs() < 1e-13, "s={s} angle={angle} r={r}");
            }
        }
    }

    #[test]
    fn implicit_residual_needs_unit_weights() {
        let tri = equilateral().scale_weights(2.0).unwrap();
        assert!(implicit_residual(Point2::ORIGIN, &tri, 3.0).is_err());
    }

    #[test]
    fn implicit_residual_off_curve_is_large() {
        let tri = FocusTriple::unit((0.0, 0.0), (2.0, 0.3), (0.7, 1.6));
        let s = 5.0;
        // A point where f = 1.5 s, found by walking out along a ray.
        let f = |m: Point2| weber_objective(m, &tri, Metric::EUCLIDEAN);
        let (mut lo, mut hi) = (0.0, 100.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(Point2::new(mid, 0.4)) < 1.5 * s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let m = Point2::new(lo, 0.4);
        let r = implicit_residual(m, &tri, s).unwrap();
        assert!(r.abs() > 1e-3 * s.powi(8), "{r}");
    }

    #[test]
    fn extract_rejects_levels_without_curves() {
        let engine = CurveEngine::new(equilateral(), Metric::EUCLIDEAN).unwrap();
        let b = GraphicBox::new(Point2::new(-1.0, -1.0), Point2::new(2.0, 2.0), 32).unwrap();
        assert!(matches!(
            engine.extract_contour(&b, 1.0, None),
            Err(Error::LevelBelowMinimum { .. })
        ));
        assert!(matches!(
            engine.extract_contour(&b, engine.s0(), None),
            Err(Error::LevelDegenerate { .. })
        ));
        assert!(engine.region_metrics(&b, engine.s0(), 32).is_err());
        assert!(engine.extract_contour(&b, 2.0, Some(-1.0)).is_err());
    }

    #[test]
    fn box_away_from_curve_gives_nothing() {
        let engine = CurveEngine::new(equilateral(), Metric::EUCLIDEAN).unwrap();
        let far = GraphicBox::new(Point2::new(10.0, 10.0), Point2::new(11.0, 11.0), 16).unwrap();
        assert!(engine.extract_contour(&far, 2.0, None).unwrap().is_empty());
    }

    #[test]
    fn region_touching_box_is_an_error() {
        let engine = CurveEngine::new(equilateral(), Metric::EUCLIDEAN).unwrap();
        let tight = GraphicBox::new(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0), 32).unwrap();
        assert!(matches!(
            engine.region_metrics(&tight, 2.0, 32),
            Err(Error::RegionNotContained { .. })
        ));
    }

    #[test]
    fn cell_area_matches_contour_polygon() {
        let engine =
            CurveEngine::new(FocusTriple::unit((0.0, 0.0), (3.0, 0.5), (1.0, 2.0)), Metric::EUCLIDEAN).unwrap();
        let s = 1.4 * engine.s0();
        let b = engine.fitted_box(s, 97).unwrap();
        let grid = engine.sample(b);
        let (curves, area) = engine.contour_grid(&grid, s, 1e-9 * s);
        assert_eq!(curves.len(), 1);
        let shoelace = curves[0].signed_area();
        assert!((area - shoelace).abs() < 1e-10 * area, "{area} vs {shoelace}");
    }

    #[test]
    fn fitted_box_contains_the_region() {
        let engine = CurveEngine::new(
            FocusTriple::unit((0.0, 0.0), (30.0, 5.0), (10.0, 20.0)),
            Metric::EUCLIDEAN,
        )
        .unwrap();
        for k in [1.01, 1.3, 3.0] {
            let s = k * engine.s0();
            let b = engine.fitted_box(s, 64).unwrap();
            assert!(engine.region_metrics(&b, s, 64).is_ok());
        }
    }

    #[test]
    fn length_closes_the_loop() {
        let c = LevelCurve {
            vertices: vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(1.0, 1.0)],
            closed: true,
            refine_tol: 0.0,
        };
        assert!((c.length() - (2.0 + 2f64.sqrt())).abs() < 1e-15);
        assert!(c.contains(Point2::new(0.7, 0.2)));
        assert!(!c.contains(Point2::new(0.2, 0.7)));
        let open = LevelCurve { closed: false, ..c };
        assert_eq!(open.length(), 2.0);
    }
}
