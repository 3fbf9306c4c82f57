//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test -p trifocal-service --test acceptance`.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use trifocal_core::{
    classify_triangle, solve_weber, torricelli_construct, visschers_bound, weber_objective, CurveEngine, Focus,
    FocusTriple, GeoPoint, GraphicBox, LevelCurve, Metric, Point2, SolveOptions, SolveStatus, TriangleClass,
    TriangleGeometry,
};

type Outcome = Result<String, String>;

struct Criterion {
    name: &'static str,
    limit: Option<Duration>,
    check: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion {
            name: "equilateral-baseline",
            limit: Some(Duration::from_secs(1)),
            check: equilateral_baseline,
        },
        Criterion {
            name: "viviani-dichotomy",
            limit: Some(Duration::from_secs(10)),
            check: viviani_dichotomy,
        },
        Criterion {
            name: "construction-iteration-agreement",
            limit: None,
            check: construction_agreement,
        },
        Criterion {
            name: "visschers-bound",
            limit: None,
            check: visschers,
        },
        Criterion {
            name: "degree-8-identity",
            limit: None,
            check: degree_eight_identity,
        },
        Criterion {
            name: "disc-oracle",
            limit: None,
            check: disc_oracle,
        },
        Criterion {
            name: "monte-carlo-oracle",
            limit: None,
            check: monte_carlo_oracle,
        },
        Criterion {
            name: "nesting-monotonicity",
            limit: None,
            check: nesting_monotonicity,
        },
        Criterion {
            name: "south-stream-scenario",
            limit: Some(Duration::from_secs(5)),
            check: south_stream,
        },
        Criterion {
            name: "weight-equivariance",
            limit: None,
            check: weight_equivariance,
        },
        Criterion {
            name: "cli-geojson-round-trip",
            limit: None,
            check: cli_round_trip,
        },
    ];
    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.check)();
        let elapsed = start.elapsed();
        let outcome = match (outcome, c.limit) {
            (Ok(detail), Some(limit)) if elapsed > limit => Err(format!("{detail}; exceeded {limit:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS {:<34} {detail} [{:.2}s]", c.name, elapsed.as_secs_f64()),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:<34} {detail} [{:.2}s]", c.name, elapsed.as_secs_f64());
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit(p: Point2) -> Focus {
    Focus::unit(p.x, p.y)
}

fn random_point(r: &mut impl Rng, half: f64) -> Point2 {
    Point2::new(r.random_range(-half..half), r.random_range(-half..half))
}

/// Unit-weight triangle without slivers: shortest side at least 5% of the
/// longest, not collinear.
fn random_triangle(r: &mut impl Rng) -> FocusTriple {
    loop {
        let tri = FocusTriple::new(
            unit(random_point(r, 5.0)),
            unit(random_point(r, 5.0)),
            unit(random_point(r, 5.0)),
        );
        let [a, b, c] = tri.positions();
        let sides = [a.distance_to(b), b.distance_to(c), c.distance_to(a)];
        let longest = sides.iter().cloned().fold(0.0, f64::max);
        let shortest = sides.iter().cloned().fold(f64::INFINITY, f64::min);
        if shortest >= 0.05 * longest && classify_triangle(&tri) != TriangleClass::Collinear {
            return tri;
        }
    }
}

fn random_admissible(r: &mut impl Rng) -> FocusTriple {
    loop {
        let tri = random_triangle(r);
        if classify_triangle(&tri) == TriangleClass::AllAnglesBelow120 {
            return tri;
        }
    }
}

fn euclid(tri: &FocusTriple) -> Result<trifocal_core::SolveResult, String> {
    solve_weber(tri, Metric::EUCLIDEAN, SolveOptions::default()).map_err(|e| e.to_string())
}

fn angle_deg(p: Point2, a: Point2, b: Point2) -> f64 {
    let (u, v) = (a - p, b - p);
    u.cross(v).abs().atan2(u.dot(v)).to_degrees()
}

fn equilateral_baseline() -> Outcome {
    let tri = FocusTriple::unit((0.0, 0.0), (1.0, 0.0), (0.5, 3f64.sqrt() / 2.0));
    let r = euclid(&tri)?;
    let centroid = Point2::new(0.5, 3f64.sqrt() / 6.0);
    let (ds, dp) = ((r.s0 - 3f64.sqrt()).abs(), r.point.distance_to(centroid));
    ensure(ds < 1e-9 && dp < 1e-9, || {
        format!("|s0 - sqrt3| = {ds:e}, |F - G| = {dp:e}")
    })?;
    Ok(format!("|s0 - sqrt3| = {ds:.1e}, |F - G| = {dp:.1e}"))
}

fn viviani_dichotomy() -> Outcome {
    let mut r = rng(101);
    for k in 0..1000 {
        let apex = random_point(&mut r, 5.0);
        let theta = r.random_range(120.0f64..179.0).to_radians();
        let dir = r.random_range(0.0..std::f64::consts::TAU);
        let u = Point2::new(dir.cos(), dir.sin());
        let mut pts = [
            apex + u * r.random_range(0.5..5.0),
            apex + u.rotated(theta) * r.random_range(0.5..5.0),
            apex,
        ];
        let slot = r.random_range(0..3usize);
        pts.swap(2, slot);
        let res = euclid(&FocusTriple::new(unit(pts[0]), unit(pts[1]), unit(pts[2])))?;
        ensure(res.status == SolveStatus::AtVertex(slot) && res.point == apex, || {
            format!("vertex case {k}: {:?} at {:?}", res.status, res.point)
        })?;
    }
    let mut worst: f64 = 0.0;
    for k in 0..1000 {
        let tri = random_admissible(&mut r);
        let res = euclid(&tri)?;
        ensure(res.status == SolveStatus::Interior, || {
            format!("interior case {k}: {:?}", res.status)
        })?;
        let [a, b, c] = tri.positions();
        for (u, v) in [(a, b), (b, c), (c, a)] {
            worst = worst.max((angle_deg(res.point, u, v) - 120.0).abs());
        }
    }
    ensure(worst < 1e-5, || format!("worst ray angle deviation {worst:e} deg"))?;
    Ok(format!(
        "1000 vertex cases exact; worst 120-degree deviation {worst:.1e} deg"
    ))
}

fn construction_agreement() -> Outcome {
    let mut r = rng(102);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let tri = random_admissible(&mut r);
        let built = torricelli_construct(&tri).map_err(|e| e.to_string())?;
        let radius = TriangleGeometry::of(&tri).circumradius(&tri);
        worst = worst.max(built.distance_to(euclid(&tri)?.point) / radius);
    }
    ensure(worst < 1e-6, || format!("worst distance {worst:e} circumradii"))?;
    Ok(format!("worst distance {worst:.1e} circumradii over 1000 triangles"))
}

fn visschers() -> Outcome {
    let mut r = rng(103);
    let mut violations = 0;
    let mut tightest = f64::INFINITY;
    for _ in 0..10_000 {
        let tri = random_triangle(&mut r);
        let (s0, bound) = (euclid(&tri)?.s0, visschers_bound(&tri));
        if s0 >= bound {
            violations += 1;
        }
        tightest = tightest.min(bound / s0);
    }
    ensure(violations == 0, || format!("{violations} violations"))?;
    Ok(format!("0 violations in 10000; smallest bound/s0 = {tightest:.4}"))
}

/// `64 s² Q1 Q2 Q3 − P²` on coordinates scaled so that `s = 1`, with
/// `P = s⁴ − 2 s² ΣQ + ΣQ² − 2 Σ QᵢQⱼ` and `Qᵢ` the squared distances.
fn scaled_implicit(m: Point2, tri: &FocusTriple, s: f64) -> f64 {
    let q: Vec<f64> = tri
        .positions()
        .iter()
        .map(|f| ((m - *f) * (1.0 / s)).dot((m - *f) * (1.0 / s)))
        .collect();
    let sum: f64 = q.iter().sum();
    let sum_sq: f64 = q.iter().map(|x| x * x).sum();
    let pairs = q[0] * q[1] + q[1] * q[2] + q[2] * q[0];
    let p = 1.0 - 2.0 * sum + sum_sq - 2.0 * pairs;
    64.0 * q[0] * q[1] * q[2] - p * p
}

fn degree_eight_identity() -> Outcome {
    let mut r = rng(104);
    let (mut worst, mut vertices): (f64, usize) = (0.0, 0);
    for k in 0..100 {
        let tri = random_triangle(&mut r);
        let engine = CurveEngine::new(tri, Metric::EUCLIDEAN).map_err(|e| e.to_string())?;
        let s = 1.3 * engine.s0();
        let bounds = engine.fitted_box(s, 256).map_err(|e| e.to_string())?;
        let curves = engine.extract_contour(&bounds, s, None).map_err(|e| e.to_string())?;
        ensure(!curves.is_empty(), || format!("triangle {k}: no curve"))?;
        for v in curves.iter().flat_map(|c| &c.vertices) {
            worst = worst.max(scaled_implicit(*v, &tri, s).abs());
            vertices += 1;
        }
    }
    ensure(worst < 1e-6, || format!("worst normalized residual {worst:e}"))?;
    Ok(format!("{vertices} vertices, worst normalized residual {worst:.1e}"))
}

fn disc_oracle() -> Outcome {
    let engine = CurveEngine::new(FocusTriple::unit((0.0, 0.0), (0.0, 0.0), (0.0, 0.0)), Metric::EUCLIDEAN)
        .map_err(|e| e.to_string())?;
    let bounds = GraphicBox::new(Point2::new(-1.5, -1.5), Point2::new(1.5, 1.5), 512).map_err(|e| e.to_string())?;
    let m = engine.region_metrics(&bounds, 3.0, 512).map_err(|e| e.to_string())?;
    let doubled = engine.region_metrics(&bounds, 3.0, 1023).map_err(|e| e.to_string())?;
    let (da, dp) = ((m.area - PI).abs(), (m.perimeter - 2.0 * PI).abs());
    ensure(da <= (3.0 * m.area_error).max(1e-3), || format!("area off by {da:e}"))?;
    ensure(dp <= (3.0 * m.perimeter_error).max(1e-3), || {
        format!("perimeter off by {dp:e}")
    })?;
    let ratio = doubled.area_error / m.area_error;
    ensure(ratio <= 0.6, || format!("area_error ratio {ratio:.3} on doubling"))?;
    Ok(format!(
        "|A - pi| = {da:.1e}, |L - 2pi| = {dp:.1e}, error ratio on doubling {ratio:.3}"
    ))
}

fn monte_carlo_oracle() -> Outcome {
    let tri = FocusTriple::unit((0.0, 0.0), (1.0, 0.0), (0.5, 3f64.sqrt() / 2.0));
    let s = 2.0;
    // Every point with sum <= 2 lies within 1 of each vertex.
    let (lo, hi) = (Point2::new(-0.01, -0.15), Point2::new(1.01, 1.01));
    let n = 10_000_000usize;
    let mut r = rng(105);
    let mut hits = 0usize;
    let ps = tri.positions();
    for _ in 0..n {
        let (x, y) = (r.random_range(lo.x..hi.x), r.random_range(lo.y..hi.y));
        let sum: f64 = ps.iter().map(|p| (x - p.x).hypot(y - p.y)).sum();
        if sum <= s {
            hits += 1;
        }
    }
    let box_area = (hi.x - lo.x) * (hi.y - lo.y);
    let frac = hits as f64 / n as f64;
    let (mc, se) = (box_area * frac, box_area * (frac * (1.0 - frac) / n as f64).sqrt());
    let engine = CurveEngine::new(tri, Metric::EUCLIDEAN).map_err(|e| e.to_string())?;
    let bounds = engine.fitted_box(s, 256).map_err(|e| e.to_string())?;
    let m = engine.region_metrics(&bounds, s, 256).map_err(|e| e.to_string())?;
    let combined = (se * se + m.area_error * m.area_error).sqrt();
    let z = (m.area - mc).abs() / combined;
    ensure(z <= 3.0, || {
        format!("grid {} vs MC {mc} (se {se:e}), {z:.2} combined SE", m.area)
    })?;
    Ok(format!("grid {:.6} vs MC {mc:.6}, {z:.2} combined SE", m.area))
}

fn nesting_monotonicity() -> Outcome {
    let mut r = rng(106);
    let inside_all = |inner: &LevelCurve, outer: &LevelCurve| inner.vertices.iter().all(|v| outer.contains(*v));
    for k in 0..50 {
        let tri = random_admissible(&mut r);
        let engine = CurveEngine::new(tri, Metric::EUCLIDEAN).map_err(|e| e.to_string())?;
        let s0 = engine.s0();
        let levels = [1.1 * s0, 1.5 * s0, 2.0 * s0];
        let bounds = engine.fitted_box(levels[2], 256).map_err(|e| e.to_string())?;
        let sets = engine.isoline_set(&bounds, &levels);
        for (i, pair) in sets.windows(2).enumerate() {
            let (inner, outer) = (&pair[0].1, &pair[1].1);
            ensure(inner.len() == 1 && outer.len() == 1, || {
                format!("instance {k}: curve counts")
            })?;
            ensure(inside_all(&inner[0], &outer[0]), || {
                format!("instance {k}: level {i} escapes level {}", i + 1)
            })?;
        }
        let mut prev = 0.0;
        for s in levels {
            let area = engine.region_metrics(&bounds, s, 256).map_err(|e| e.to_string())?.area;
            ensure(area > prev, || format!("instance {k}: area {area} after {prev}"))?;
            prev = area;
        }
    }
    Ok("50 instances nested with strictly increasing areas".into())
}

fn haversine_km(a: GeoPoint, b: GeoPoint) -> f64 {
    let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
    let h = ((p2 - p1) / 2.0).sin().powi(2) + p1.cos() * p2.cos() * ((b.lon - a.lon).to_radians() / 2.0).sin().powi(2);
    2.0 * 6371.0088 * h.sqrt().asin()
}

fn cli(args: &[&str]) -> Result<String, String> {
    let o = Command::new(env!("CARGO_BIN_EXE_trifocal"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !o.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&o.stderr)));
    }
    String::from_utf8(o.stdout).map_err(|e| e.to_string())
}

fn south_stream() -> Outcome {
    let pleven = trifocal_core::load_scenario(trifocal_core::geo::SOUTH_STREAM)
        .map_err(|e| e.to_string())?
        .reference("Pleven")
        .ok_or("no Pleven reference")?;
    let mut found = Vec::new();
    for file in ["south-stream.scenario", "south-stream-varna.scenario"] {
        let v: Value = serde_json::from_str(&cli(&["solve", "--scenario", file, "--format", "json"])?)
            .map_err(|e| e.to_string())?;
        let loc = GeoPoint::new(
            v["location"]["lon"].as_f64().ok_or("lon")?,
            v["location"]["lat"].as_f64().ok_or("lat")?,
        );
        let d = haversine_km(loc, pleven);
        ensure(d < 150.0, || format!("{file}: {d:.1} km from Pleven"))?;
        found.push((loc, d));
    }
    let apart = haversine_km(found[0].0, found[1].0);
    ensure(apart < 150.0, || format!("variants {apart:.1} km apart"))?;
    Ok(format!(
        "{:.1} km and {:.1} km from Pleven, variants {apart:.1} km apart",
        found[0].1, found[1].1
    ))
}

fn weight_equivariance() -> Outcome {
    let mut r = rng(107);
    let (mut worst_point, mut worst_value): (f64, f64) = (0.0, 0.0);
    let tol = SolveOptions::default().tol;
    for _ in 0..300 {
        let base = random_triangle(&mut r);
        let w = [
            r.random_range(0.2..5.0),
            r.random_range(0.2..5.0),
            r.random_range(0.2..5.0),
        ];
        let f = base.foci();
        let tri = FocusTriple::new(
            Focus::new(f[0].position, w[0]).map_err(|e| e.to_string())?,
            Focus::new(f[1].position, w[1]).map_err(|e| e.to_string())?,
            Focus::new(f[2].position, w[2]).map_err(|e| e.to_string())?,
        );
        let a = euclid(&tri)?;
        for lambda in [0.5, 2.0, 7.0] {
            let b = euclid(&tri.scale_weights(lambda).map_err(|e| e.to_string())?)?;
            worst_point = worst_point.max(a.point.distance_to(b.point));
            worst_value = worst_value.max((b.s0 - lambda * a.s0).abs() / (lambda * a.s0));
        }
    }
    ensure(worst_point <= 10.0 * tol && worst_value <= 1e-9, || {
        format!("argmin moved {worst_point:e}, s0 relative error {worst_value:e}")
    })?;
    Ok(format!(
        "argmin moved at most {worst_point:.1e}, s0 scaling error {worst_value:.1e}"
    ))
}

fn cli_round_trip() -> Outcome {
    let cases: [(&[&str], FocusTriple, Metric, f64); 2] = [
        (
            &[
                "--focus",
                "0,0,1",
                "--focus",
                "1,0,1",
                "--focus",
                "0.5,0.8660254037844386,1",
                "--s",
                "2",
            ],
            FocusTriple::unit((0.0, 0.0), (1.0, 0.0), (0.5, 0.8660254037844386)),
            Metric::EUCLIDEAN,
            2.0,
        ),
        (
            &[
                "--focus",
                "-1,0.5,2.5",
                "--focus",
                "3,-1",
                "--focus",
                "1,2.5,0.7",
                "--metric",
                "3,1.2",
                "--s",
                "14",
            ],
            FocusTriple::new(
                Focus::new(Point2::new(-1.0, 0.5), 2.5).map_err(|e| e.to_string())?,
                Focus::unit(3.0, -1.0),
                Focus::new(Point2::new(1.0, 2.5), 0.7).map_err(|e| e.to_string())?,
            ),
            Metric::new(3.0, 1.2).map_err(|e| e.to_string())?,
            14.0,
        ),
    ];
    let mut checked = 0;
    for (flags, tri, metric, s) in cases {
        let mut args = vec!["render", "--format", "geojson"];
        args.extend_from_slice(flags);
        let v: Value = serde_json::from_str(&cli(&args)?).map_err(|e| e.to_string())?;
        let features = v["features"].as_array().ok_or("no features")?;
        let mut rings = 0;
        for f in features.iter().filter(|f| f["geometry"]["type"] == "Polygon") {
            rings += 1;
            let tol = f["properties"]["refine_tol"].as_f64().ok_or("refine_tol")?;
            for c in f["geometry"]["coordinates"][0].as_array().ok_or("ring")? {
                let p = Point2::new(c[0].as_f64().ok_or("x")?, c[1].as_f64().ok_or("y")?);
                let off = (weber_objective(p, &tri, metric) - s).abs();
                ensure(off <= tol, || {
                    format!("vertex {p:?} off the level by {off:e} > {tol:e}")
                })?;
                checked += 1;
            }
        }
        ensure(rings == 1, || format!("{rings} rings for {flags:?}"))?;
    }
    Ok(format!("{checked} ring vertices within refine_tol"))
}
