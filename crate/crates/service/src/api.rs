//! Request and response bodies shared by the HTTP service and the CLI, with
//! the pure handlers behind each endpoint.
//!
//! All coordinates are in the caller's space; nothing is rescaled. Numbers
//! are written with the shortest representation that parses back to the
//! same `f64`, so responses carry library results without rounding.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use trifocal_core::geo::{bundled_scenarios, Scenario};
use trifocal_core::{
    load_scenario, solve_weber, CurveEngine, Error, Focus, FocusTriple, GraphicBox, LevelCurve, Metric, Point2,
    RegionMetrics, SolveOptions, SolveResult, SolveStatus,
};

pub const MAX_WEIGHT: f64 = 10.0;
pub const DEFAULT_RESOLUTION: usize = 256;
pub const MAX_RESOLUTION: usize = 2048;
pub const MAX_FIELD_RESOLUTION: usize = 1024;
pub const MAX_LEVELS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComputeRequest {
    /// Opaque client identifier, echoed back.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<Value>,
    pub foci: Vec<FocusDto>,
    #[serde(default)]
    pub metric: MetricDto,
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoxDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FocusDto {
    pub x: f64,
    pub y: f64,
    #[serde(default = "one")]
    pub w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricDto {
    #[serde(default = "two")]
    pub p: f64,
    #[serde(default = "one")]
    pub correction: f64,
}

impl Default for MetricDto {
    fn default() -> Self {
        MetricDto {
            p: 2.0,
            correction: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxDto {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

/// Error body: `{"error": {...}}`. `field` names the offending request path,
/// `s0` is present whenever the minimum is known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s0: Option<f64>,
}

impl ApiError {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        ApiError {
            status: 400,
            code: "validation".into(),
            message: message.into(),
            field: Some(field.into()),
            s0: None,
        }
    }

    fn with_s0(mut self, s0: f64) -> Self {
        self.s0 = Some(s0);
        self
    }

    pub fn body(&self) -> Value {
        serde_json::json!({ "error": self })
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.field {
            Some(field) => write!(f, "{}: {}: {}", self.code, field, self.message),
            None => write!(f, "{}: {}", self.code, self.message),
        }
    }
}

impl std::error::Error for ApiError {}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        let (status, code, field, s0) = match e {
            Error::InvalidInput { field, .. } => (400, "validation", Some(field.to_string()), None),
            Error::OutOfBounds { .. } | Error::Precondition(_) | Error::EvaluationAtFocus { .. } => {
                (400, "validation", None, None)
            }
            Error::Parse { .. } => (400, "parse", None, None),
            Error::LevelBelowMinimum { s0, .. } => (422, "level-below-minimum", Some("s".into()), Some(s0)),
            Error::LevelDegenerate { s0, .. } => (422, "level-degenerate", Some("s".into()), Some(s0)),
            Error::RegionNotContained { .. } => (422, "region-not-contained", Some("box".into()), None),
            Error::NotConverged { best, .. } => (500, "not-converged", None, Some(best.s0)),
        };
        ApiError {
            status,
            code: code.into(),
            message,
            field,
            s0,
        }
    }
}

/// Parses a request body, naming the failing path on type errors.
pub fn parse_request(body: &[u8]) -> Result<ComputeRequest, ApiError> {
    let de = &mut serde_json::Deserializer::from_slice(body);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ApiError {
            status: 400,
            code: "invalid-json".into(),
            message: e.into_inner().to_string(),
            field: (path != ".").then_some(path),
            s0: None,
        }
    })
}

/// A request after validation.
#[derive(Debug, Clone)]
pub struct Problem {
    pub foci: FocusTriple,
    pub metric: Metric,
    pub bounds: Option<(Point2, Point2)>,
    pub s: Option<f64>,
    pub levels: Option<Vec<f64>>,
    pub resolution: usize,
}

fn finite(field: &str, v: f64) -> Result<f64, ApiError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ApiError::validation(field, "must be a finite number"))
    }
}

fn positive_level(field: &str, v: f64) -> Result<f64, ApiError> {
    if finite(field, v)? > 0.0 {
        Ok(v)
    } else {
        Err(ApiError::validation(field, format!("level must be positive, got {v}")))
    }
}

impl ComputeRequest {
    pub fn validate(&self) -> Result<Problem, ApiError> {
        if self.foci.len() != 3 {
            return Err(ApiError::validation(
                "foci",
                format!("exactly 3 foci required, got {}", self.foci.len()),
            ));
        }
        let mut foci = Vec::with_capacity(3);
        for (k, f) in self.foci.iter().enumerate() {
            let x = finite(&format!("foci[{k}].x"), f.x)?;
            let y = finite(&format!("foci[{k}].y"), f.y)?;
            let w = finite(&format!("foci[{k}].w"), f.w)?;
            if !(w > 0.0 && w <= MAX_WEIGHT) {
                return Err(ApiError::validation(
                    format!("foci[{k}].w"),
                    format!("weight must be in (0, {MAX_WEIGHT}], got {w}"),
                ));
            }
            foci.push(Focus::new(Point2::new(x, y), w)?);
        }
        let foci = FocusTriple::new(foci[0], foci[1], foci[2]);

        let p = finite("metric.p", self.metric.p)?;
        if p < 1.0 {
            return Err(ApiError::validation(
                "metric.p",
                format!("order must be at least 1, got {p}"),
            ));
        }
        let correction = finite("metric.correction", self.metric.correction)?;
        let metric =
            Metric::new(p, correction).map_err(|e| ApiError::validation("metric.correction", e.to_string()))?;

        let bounds = match self.bounds {
            None => None,
            Some(b) => {
                let min = Point2::new(finite("box.x0", b.x0)?, finite("box.y0", b.y0)?);
                let max = Point2::new(finite("box.x1", b.x1)?, finite("box.y1", b.y1)?);
                if max.x <= min.x {
                    return Err(ApiError::validation("box.x1", "must exceed box.x0"));
                }
                if max.y <= min.y {
                    return Err(ApiError::validation("box.y1", "must exceed box.y0"));
                }
                Some((min, max))
            }
        };

        let s = self.s.map(|s| positive_level("s", s)).transpose()?;
        let levels = match &self.levels {
            None => None,
            Some(levels) => {
                if levels.is_empty() || levels.len() > MAX_LEVELS {
                    return Err(ApiError::validation(
                        "levels",
                        format!("between 1 and {MAX_LEVELS} levels"),
                    ));
                }
                let checked = levels
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| positive_level(&format!("levels[{k}]"), v))
                    .collect::<Result<Vec<_>, _>>()?;
                Some(checked)
            }
        };

        let resolution = self.resolution.unwrap_or(DEFAULT_RESOLUTION);
        if !(2..=MAX_RESOLUTION).contains(&resolution) {
            return Err(ApiError::validation(
                "resolution",
                format!("must be in [2, {MAX_RESOLUTION}], got {resolution}"),
            ));
        }
        Ok(Problem {
            foci,
            metric,
            bounds,
            s,
            levels,
            resolution,
        })
    }
}

impl Problem {
    pub fn solve(&self, options: SolveOptions) -> Result<SolveResult, ApiError> {
        Ok(solve_weber(&self.foci, self.metric, options)?)
    }

    pub fn engine(&self, options: SolveOptions) -> Result<CurveEngine, ApiError> {
        Ok(CurveEngine::with_solution(self.foci, self.metric, self.solve(options)?))
    }

    /// The requested box; otherwise one fitted around `{f ≤ fit}`; otherwise
    /// the foci's bounding square with a quarter-diameter margin.
    pub fn graphic_box(&self, engine: &CurveEngine, fit: Option<f64>) -> Result<GraphicBox, ApiError> {
        if let Some((min, max)) = self.bounds {
            return Ok(GraphicBox::new(min, max, self.resolution)?);
        }
        if let Some(s) = fit.filter(|&s| s > engine.s0()) {
            if let Ok(b) = engine.fitted_box(s, self.resolution) {
                return Ok(b);
            }
        }
        let ps = self.foci.positions();
        let mut min = ps[0];
        let mut max = ps[0];
        for p in ps {
            min = Point2::new(min.x.min(p.x), min.y.min(p.y));
            max = Point2::new(max.x.max(p.x), max.y.max(p.y));
        }
        let side = (max.x - min.x).max(max.y - min.y);
        let half = if side > 0.0 { 0.75 * side } else { 1.0 };
        let c = (min + max) * 0.5;
        Ok(GraphicBox::new(
            c - Point2::new(half, half),
            c + Point2::new(half, half),
            self.resolution,
        )?)
    }

    /// Levels asked for: the `levels` list, or the single `s`.
    fn requested_levels(&self) -> Result<Option<Vec<f64>>, ApiError> {
        match (&self.levels, self.s) {
            (Some(_), Some(_)) => Err(ApiError::validation("levels", "give either s or levels, not both")),
            (Some(levels), None) => Ok(Some(levels.clone())),
            (None, Some(s)) => Ok(Some(vec![s])),
            (None, None) => Ok(None),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointDto {
    pub x: f64,
    pub y: f64,
}

impl From<Point2> for PointDto {
    fn from(p: Point2) -> Self {
        PointDto { x: p.x, y: p.y }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveDto {
    pub point: PointDto,
    pub s0: f64,
    /// `interior`, `at-vertex` or `degenerate-coincident`.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex: Option<usize>,
    pub iterations: usize,
    pub residual: f64,
}

impl From<&SolveResult> for SolveDto {
    fn from(r: &SolveResult) -> Self {
        let (status, vertex) = match r.status {
            SolveStatus::Interior => ("interior", None),
            SolveStatus::AtVertex(i) => ("at-vertex", Some(i)),
            SolveStatus::DegenerateCoincident => ("degenerate-coincident", None),
        };
        SolveDto {
            point: r.point.into(),
            s0: r.s0,
            status: status.into(),
            vertex,
            iterations: r.iterations,
            residual: r.residual,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridDto {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    pub nx: usize,
    pub ny: usize,
}

impl From<&GraphicBox> for GridDto {
    fn from(b: &GraphicBox) -> Self {
        let (nx, ny) = b.nodes();
        GridDto {
            x0: b.min().x,
            y0: b.min().y,
            x1: b.max().x,
            y1: b.max().y,
            nx,
            ny,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveDto {
    pub closed: bool,
    pub refine_tol: f64,
    /// `[x, y]` pairs; a closed curve joins its last vertex to the first.
    pub vertices: Vec<[f64; 2]>,
}

impl From<&LevelCurve> for CurveDto {
    fn from(c: &LevelCurve) -> Self {
        CurveDto {
            closed: c.closed,
            refine_tol: c.refine_tol,
            vertices: c.vertices.iter().map(|v| [v.x, v.y]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourSet {
    pub level: f64,
    pub curves: Vec<CurveDto>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsDto {
    pub s: f64,
    pub area: f64,
    pub perimeter: f64,
    pub area_error: f64,
    pub perimeter_error: f64,
    pub grid_step: f64,
}

impl MetricsDto {
    fn new(s: f64, m: &RegionMetrics) -> Self {
        MetricsDto {
            s,
            area: m.area,
            perimeter: m.perimeter,
            area_error: m.area_error,
            perimeter_error: m.perimeter_error,
            grid_step: m.grid_step,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleDto {
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremaDto {
    pub min: SampleDto,
    pub max: SampleDto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResponse {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<Value>,
    pub s0: f64,
    pub solve: SolveDto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourResponse {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<Value>,
    pub s0: f64,
    pub solve: SolveDto,
    #[serde(rename = "box")]
    pub grid: GridDto,
    pub contours: Vec<ContourSet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsResponse {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<Value>,
    pub s0: f64,
    #[serde(rename = "box")]
    pub grid: GridDto,
    pub metrics: MetricsDto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldResponse {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<Value>,
    pub s0: f64,
    #[serde(rename = "box")]
    pub grid: GridDto,
    /// Row-major, `ny` rows of `nx` values, first row at `y0`.
    pub values: Vec<f64>,
    pub extrema: ExtremaDto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComputeResponse {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<Value>,
    pub s0: f64,
    pub solve: SolveDto,
    #[serde(rename = "box")]
    pub grid: GridDto,
    pub contours: Vec<ContourSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricsDto>,
    pub extrema: ExtremaDto,
}

fn contour_sets(engine: &CurveEngine, bounds: &GraphicBox, levels: &[f64]) -> Vec<ContourSet> {
    engine
        .isoline_set(bounds, levels)
        .into_iter()
        .map(|(level, curves)| ContourSet {
            level,
            curves: curves.iter().map(CurveDto::from).collect(),
        })
        .collect()
}

pub fn solve(req: &ComputeRequest) -> Result<SolveResponse, ApiError> {
    let r = req.validate()?.solve(SolveOptions::default())?;
    Ok(SolveResponse {
        id: req.id.clone(),
        s0: r.s0,
        solve: SolveDto::from(&r),
    })
}

/// Curves for `s` or for each of `levels`. A single `s` without a curve is
/// an error carrying `s0`; inside a `levels` list such entries are empty.
pub fn contour(req: &ComputeRequest) -> Result<ContourResponse, ApiError> {
    contour_with(req, SolveOptions::default())
}

pub fn contour_with(req: &ComputeRequest, options: SolveOptions) -> Result<ContourResponse, ApiError> {
    let problem = req.validate()?;
    let levels = problem
        .requested_levels()?
        .ok_or_else(|| ApiError::validation("s", "contour needs s or levels"))?;
    let engine = problem.engine(options)?;
    let s0 = engine.s0();
    let bounds = problem.graphic_box(&engine, levels.iter().cloned().reduce(f64::max))?;
    let contours = match problem.s {
        Some(s) => {
            let curves = engine
                .extract_contour(&bounds, s, None)
                .map_err(|e| ApiError::from(e).with_s0(s0))?;
            vec![ContourSet {
                level: s,
                curves: curves.iter().map(CurveDto::from).collect(),
            }]
        }
        None => contour_sets(&engine, &bounds, &levels),
    };
    Ok(ContourResponse {
        id: req.id.clone(),
        s0,
        solve: SolveDto::from(engine.solution()),
        grid: GridDto::from(&bounds),
        contours,
    })
}

/// Area and perimeter of `{f ≤ s}`; `resolution` is the coarser of the two
/// grids used for the error estimate.
pub fn region_metrics(req: &ComputeRequest) -> Result<MetricsResponse, ApiError> {
    region_metrics_with(req, SolveOptions::default())
}

pub fn region_metrics_with(req: &ComputeRequest, options: SolveOptions) -> Result<MetricsResponse, ApiError> {
    let problem = req.validate()?;
    let s = problem
        .s
        .ok_or_else(|| ApiError::validation("s", "region metrics need s"))?;
    if problem.levels.is_some() {
        return Err(ApiError::validation("levels", "region metrics take a single s"));
    }
    let engine = problem.engine(options)?;
    let s0 = engine.s0();
    let metrics = metrics_for(&problem, &engine, s).map_err(|e| e.with_s0(s0))?;
    Ok(MetricsResponse {
        id: req.id.clone(),
        s0,
        grid: metrics.0,
        metrics: metrics.1,
    })
}

fn metrics_for(problem: &Problem, engine: &CurveEngine, s: f64) -> Result<(GridDto, MetricsDto), ApiError> {
    let bounds = problem.graphic_box(engine, Some(s))?;
    let m = engine.region_metrics(&bounds, s, problem.resolution)?;
    Ok((GridDto::from(&bounds), MetricsDto::new(s, &m)))
}

pub fn field(req: &ComputeRequest) -> Result<FieldResponse, ApiError> {
    let problem = req.validate()?;
    if problem.resolution > MAX_FIELD_RESOLUTION {
        return Err(ApiError::validation(
            "resolution",
            format!("field sampling is limited to {MAX_FIELD_RESOLUTION} nodes per axis"),
        ));
    }
    let engine = problem.engine(SolveOptions::default())?;
    let fit = problem.requested_levels()?.and_then(|l| l.into_iter().reduce(f64::max));
    let bounds = problem.graphic_box(&engine, fit)?;
    let sample = engine.sample_field(&bounds);
    Ok(FieldResponse {
        id: req.id.clone(),
        s0: engine.s0(),
        grid: GridDto::from(&bounds),
        extrema: extrema(&sample),
        values: sample.values,
    })
}

fn extrema(sample: &trifocal_core::FieldSample) -> ExtremaDto {
    ExtremaDto {
        min: SampleDto {
            x: sample.min_point.x,
            y: sample.min_point.y,
            value: sample.min_value,
        },
        max: SampleDto {
            x: sample.max_point.x,
            y: sample.max_point.y,
            value: sample.max_value,
        },
    }
}

/// Everything a map view needs in one call: the minimizer, curves for the
/// requested levels, metrics when `s` is given, and the field extrema.
pub fn compute(req: &ComputeRequest) -> Result<ComputeResponse, ApiError> {
    let problem = req.validate()?;
    let engine = problem.engine(SolveOptions::default())?;
    let s0 = engine.s0();
    let levels = problem.requested_levels()?.unwrap_or_default();
    let bounds = problem.graphic_box(&engine, levels.iter().cloned().reduce(f64::max))?;
    let metrics = match problem.s {
        Some(s) => Some(metrics_for(&problem, &engine, s).map_err(|e| e.with_s0(s0))?.1),
        None => None,
    };
    Ok(ComputeResponse {
        id: req.id.clone(),
        s0,
        solve: SolveDto::from(engine.solution()),
        grid: GridDto::from(&bounds),
        contours: contour_sets(&engine, &bounds, &levels),
        metrics,
        extrema: extrema(&engine.sample_field(&bounds)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapDto {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<String>,
    pub width: f64,
    pub height: f64,
    pub west: f64,
    pub east: f64,
    pub south: f64,
    pub north: f64,
}

/// A named place with both its geographic and its pixel position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaceDto {
    pub name: String,
    pub lon: f64,
    pub lat: f64,
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDto {
    pub file: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    pub map: MapDto,
    pub foci: Vec<PlaceDto>,
    pub references: Vec<PlaceDto>,
}

impl ScenarioDto {
    pub fn new(file: &str, scenario: &Scenario) -> Self {
        let cal = &scenario.calibration;
        let (width, height) = cal.size();
        let (west, east, south, north) = cal.bounds();
        let place = |name: &str, g: trifocal_core::GeoPoint, w| {
            let p = cal.project(g);
            PlaceDto {
                name: name.to_string(),
                lon: g.lon,
                lat: g.lat,
                x: p.x,
                y: p.y,
                w,
            }
        };
        ScenarioDto {
            file: file.to_string(),
            name: scenario.name.clone(),
            s: scenario.default_s,
            map: MapDto {
                image: cal.image.clone(),
                width,
                height,
                west,
                east,
                south,
                north,
            },
            foci: scenario
                .foci
                .iter()
                .map(|f| place(&f.name, f.location, Some(f.weight)))
                .collect(),
            references: scenario
                .references
                .iter()
                .map(|r| place(&r.name, r.location, None))
                .collect(),
        }
    }
}

pub fn scenarios() -> Vec<ScenarioDto> {
    bundled_scenarios()
        .iter()
        .map(|(file, doc)| ScenarioDto::new(file, &load_scenario(doc).expect("bundled scenario parses")))
        .collect()
}
