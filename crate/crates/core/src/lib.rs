//! Weighted Fermat-Torricelli-Weber points for three foci and their level
//! curves (3-ellipses).
//!
//! - [`geometry`]: Minkowski metrics and the weighted objective field.
//! - [`fermat`]: the minimizer, by construction or by iteration.
//! - [`curve`]: level-set classification, contours, isolines, area and
//!   perimeter.
//! - [`geo`]: map calibration and geographic scenarios.
//!
//! Grid work runs on rayon when the `parallel` feature is on (the default);
//! see [`Execution`].

pub mod curve;
pub mod error;
pub mod exec;
pub mod fermat;
pub mod geo;
pub mod geometry;

pub use curve::{
    classify_level, implicit_residual, CurveEngine, FieldSample, GraphicBox, LevelClass, LevelCurve, LevelParameter,
    RegionMetrics,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use fermat::{
    classify_triangle, solve_weber, torricelli_construct, visschers_bound, SolveOptions, SolveResult, SolveStatus,
    TriangleClass, TriangleGeometry,
};
pub use geo::{load_scenario, GeoPoint, MapCalibration, Scenario};
pub use geometry::{
    distance, evaluate_distances, weber_gradient, weber_objective, EvaluatedDistances, Focus, FocusTriple, Metric,
    Point2,
};
