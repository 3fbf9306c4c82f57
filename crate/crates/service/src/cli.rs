//! `trifocal` command line.
//!
//! Exit codes: 0 success, 2 invalid input (including levels without a curve
//! and regions cut by the box), 3 solver non-convergence, 1 anything else.

use std::io::Write;
use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use trifocal_core::geo::{bundled_scenarios, PlanarFrame};
use trifocal_core::{load_scenario, Point2, Scenario, SolveOptions};

use crate::api::{self, ApiError, BoxDto, ComputeRequest, ContourSet, FocusDto, MetricDto};
use crate::export::{self, Marker, MarkerKind, SvgView};
use crate::http::DEFAULT_PORT;

#[derive(Debug, Parser)]
#[command(
    name = "trifocal",
    version,
    about = "Weighted three-focus minimizers and their level curves"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the minimizer and the minimum value S0.
    Solve(SolveArgs),
    /// Level curves as JSON (default), GeoJSON or SVG.
    Contour(DrawArgs),
    /// Area and perimeter of the region inside the level-S curve.
    Metrics(MetricsArgs),
    /// Level curves as SVG (default) or GeoJSON.
    Render(DrawArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct Input {
    /// Scenario file, or the name of a bundled one.
    #[arg(long, conflicts_with = "focus")]
    pub scenario: Option<PathBuf>,
    /// Focus as `x,y[,w]`; give exactly three.
    #[arg(long, value_parser = parse_focus, allow_hyphen_values = true)]
    pub focus: Vec<FocusDto>,
    /// Minkowski order and optional correction factor, `p[,correction]`.
    #[arg(long, value_parser = parse_metric)]
    pub metric: Option<MetricDto>,
    /// Solver step tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Solver iteration cap.
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long, value_enum, default_value_t = TextFormat::Text)]
    pub format: TextFormat,
}

#[derive(Debug, Args)]
pub struct DrawArgs {
    #[command(flatten)]
    pub input: Input,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Comma-separated levels.
    #[arg(long, value_delimiter = ',', conflicts_with = "s")]
    pub levels: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub format: Option<DrawFormat>,
    /// Raster drawn under the SVG; defaults to the scenario's image.
    #[arg(long)]
    pub background: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[command(flatten)]
    pub input: Input,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_enum, default_value_t = TextFormat::Text)]
    pub format: TextFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Level S; scenarios may supply a default.
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<f64>,
    /// Box `x0,y0,x1,y1`; fitted to the curve when omitted.
    #[arg(long = "box", value_parser = parse_box, allow_hyphen_values = true)]
    pub bounds: Option<BoxDto>,
    /// Grid nodes per axis.
    #[arg(long)]
    pub resolution: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = DEFAULT_PORT)]
    pub port: u16,
    #[arg(long, default_value_t = IpAddr::V4(Ipv4Addr::LOCALHOST))]
    pub host: IpAddr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TextFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DrawFormat {
    Json,
    Geojson,
    Svg,
}

fn numbers(s: &str, min: usize, max: usize) -> Result<Vec<f64>, String> {
    let parts = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if parts.len() < min || parts.len() > max {
        return Err(format!("expected {min} to {max} comma-separated numbers"));
    }
    Ok(parts)
}

fn parse_focus(s: &str) -> Result<FocusDto, String> {
    let v = numbers(s, 2, 3)?;
    Ok(FocusDto {
        x: v[0],
        y: v[1],
        w: v.get(2).copied().unwrap_or(1.0),
    })
}

fn parse_metric(s: &str) -> Result<MetricDto, String> {
    let v = numbers(s, 1, 2)?;
    Ok(MetricDto {
        p: v[0],
        correction: v.get(1).copied().unwrap_or(1.0),
    })
}

fn parse_box(s: &str) -> Result<BoxDto, String> {
    let v = numbers(s, 4, 4)?;
    Ok(BoxDto {
        x0: v[0],
        y0: v[1],
        x1: v[2],
        y1: v[3],
    })
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<ApiError> for CliError {
    fn from(e: ApiError) -> Self {
        let code = match (e.code.as_str(), e.status) {
            ("not-converged", _) => 3,
            (_, 400..=499) => 2,
            _ => 1,
        };
        let mut message = e.to_string();
        if let Some(s0) = e.s0 {
            message.push_str(&format!(" (s0 = {s0})"));
        }
        CliError { code, message }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError {
            code: 1,
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> CliError {
    CliError {
        code: 2,
        message: message.into(),
    }
}

/// Scenario inputs are solved in the scenario's km frame and reported in
/// degrees.
struct Geo {
    scenario: Scenario,
    frame: PlanarFrame,
}

impl Geo {
    fn lon_lat(&self, p: [f64; 2]) -> [f64; 2] {
        let g = self.frame.to_geo(Point2::new(p[0], p[1]));
        [g.lon, g.lat]
    }

    fn pixel(&self, p: [f64; 2]) -> [f64; 2] {
        let g = self.frame.to_geo(Point2::new(p[0], p[1]));
        let q = self.scenario.calibration.project(g);
        [q.x, q.y]
    }
}

struct Context {
    request: ComputeRequest,
    options: SolveOptions,
    geo: Option<Geo>,
    labels: [String; 3],
}

fn read_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = match std::fs::read_to_string(path) {
        Ok(text) => text,
        Err(e) => {
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
            match bundled_scenarios()
                .iter()
                .find(|(file, _)| *file == name || file.trim_end_matches(".scenario") == name)
            {
                Some((_, doc)) if !path.exists() => doc.to_string(),
                _ => return Err(CliError::from(e)),
            }
        }
    };
    load_scenario(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn context(input: &Input, grid: Option<&GridArgs>, levels: Option<Vec<f64>>) -> Result<Context, CliError> {
    let mut options = SolveOptions::default();
    if let Some(tol) = input.tol {
        options.tol = tol;
    }
    if let Some(max_iter) = input.max_iter {
        options.max_iter = max_iter;
    }
    let metric = input.metric.unwrap_or_default();
    let mut s = grid.and_then(|g| g.s);
    let (foci, geo, labels) = match &input.scenario {
        Some(path) => {
            let scenario = read_scenario(path)?;
            let planar = scenario.planar_foci().map_err(|e| invalid(e.to_string()))?;
            let foci = planar
                .foci()
                .map(|f| FocusDto {
                    x: f.position.x,
                    y: f.position.y,
                    w: f.weight(),
                })
                .to_vec();
            if s.is_none() && levels.is_none() {
                s = scenario.default_s;
            }
            let labels = scenario.foci.clone().map(|f| f.name);
            let frame = scenario.frame();
            (foci, Some(Geo { scenario, frame }), labels)
        }
        None => {
            if input.focus.len() != 3 {
                return Err(invalid(format!(
                    "give --scenario or exactly three --focus x,y[,w] (got {})",
                    input.focus.len()
                )));
            }
            (input.focus.clone(), None, ["A", "B", "C"].map(String::from))
        }
    };
    let request = ComputeRequest {
        id: None,
        foci,
        metric,
        bounds: grid.and_then(|g| g.bounds),
        s,
        levels,
        resolution: grid.and_then(|g| g.resolution),
    };
    Ok(Context {
        request,
        options,
        geo,
        labels,
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            let written = stdout.write_all(text.as_bytes()).and_then(|_| {
                if text.ends_with('\n') {
                    Ok(())
                } else {
                    stdout.write_all(b"\n")
                }
            });
            match written {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                _ => {}
            }
        }
    }
    Ok(())
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(args) => solve(&args),
        Command::Contour(args) => draw(&args, DrawFormat::Json),
        Command::Render(args) => draw(&args, DrawFormat::Svg),
        Command::Metrics(args) => metrics(&args),
        Command::Serve(args) => serve(&args),
    }
}

fn solve(args: &SolveArgs) -> Result<(), CliError> {
    let ctx = context(&args.input, None, None)?;
    let problem = ctx.request.validate()?;
    let r = problem.solve(ctx.options)?;
    let dto = api::SolveDto::from(&r);
    let location = ctx.geo.as_ref().map(|g| g.lon_lat([r.point.x, r.point.y]));
    let text = match args.format {
        TextFormat::Json => {
            let mut v = json!({ "s0": r.s0, "solve": dto });
            if let (Some(geo), Some([lon, lat])) = (&ctx.geo, location) {
                v["scenario"] = Value::from(geo.scenario.name.clone());
                v["location"] = json!({ "lon": lon, "lat": lat });
            }
            pretty(&v)
        }
        TextFormat::Text => {
            let mut t = String::new();
            match (&ctx.geo, location) {
                (Some(geo), Some([lon, lat])) => {
                    t += &format!("scenario {}\n", geo.scenario.name);
                    t += &format!("point    lon {lon} lat {lat}\n");
                    t += &format!("s0       {} km\n", r.s0);
                    for reference in &geo.scenario.references {
                        let d = geo.frame.to_plane(reference.location).distance_to(r.point);
                        t += &format!("near     {} ({d:.1} km)\n", reference.name);
                    }
                }
                _ => {
                    t += &format!("point    {} {}\n", r.point.x, r.point.y);
                    t += &format!("s0       {}\n", r.s0);
                }
            }
            t += &format!("status   {}", dto.status);
            if let Some(v) = dto.vertex {
                t += &format!(" {}", ctx.labels[v]);
            }
            t += &format!("\niterations {}\n", dto.iterations);
            t
        }
    };
    emit(None, &text)
}

fn map_contours(sets: &mut [ContourSet], f: impl Fn([f64; 2]) -> [f64; 2]) {
    for set in sets {
        for curve in &mut set.curves {
            for v in &mut curve.vertices {
                *v = f(*v);
            }
        }
    }
}

fn draw(args: &DrawArgs, default_format: DrawFormat) -> Result<(), CliError> {
    let ctx = context(&args.input, Some(&args.grid), args.levels.clone())?;
    let format = args.format.unwrap_or(default_format);
    let mut response = api::contour_with(&ctx.request, ctx.options)?;

    let markers = |to: &dyn Fn([f64; 2]) -> [f64; 2]| {
        let mut m: Vec<Marker> = ctx
            .request
            .foci
            .iter()
            .zip(&ctx.labels)
            .map(|(f, label)| Marker {
                kind: MarkerKind::Focus,
                label: label.clone(),
                at: to([f.x, f.y]),
                value: f.w,
            })
            .collect();
        m.push(Marker {
            kind: MarkerKind::Minimizer,
            label: "F".into(),
            at: to([response.solve.point.x, response.solve.point.y]),
            value: response.s0,
        });
        m
    };

    let text = match (format, &ctx.geo) {
        (DrawFormat::Json, None) => pretty(&response),
        (DrawFormat::Json, Some(geo)) => {
            let [lon, lat] = geo.lon_lat([response.solve.point.x, response.solve.point.y]);
            map_contours(&mut response.contours, |p| geo.lon_lat(p));
            let mut v = serde_json::to_value(&response).expect("serializable");
            v["location"] = json!({ "lon": lon, "lat": lat });
            v["coordinates"] = Value::from("lon-lat");
            pretty(&v)
        }
        (DrawFormat::Geojson, None) => {
            let markers = markers(&|p| p);
            pretty(&export::geojson(&response.contours, &markers))
        }
        (DrawFormat::Geojson, Some(geo)) => {
            let markers = markers(&|p| geo.lon_lat(p));
            map_contours(&mut response.contours, |p| geo.lon_lat(p));
            pretty(&export::geojson(&response.contours, &markers))
        }
        (DrawFormat::Svg, None) => {
            let g = response.grid;
            let to_view = move |[x, y]: [f64; 2]| [x - g.x0, g.y1 - y];
            let markers = markers(&to_view);
            map_contours(&mut response.contours, to_view);
            let view = SvgView {
                width: g.x1 - g.x0,
                height: g.y1 - g.y0,
                background: args.background.clone(),
            };
            export::svg(&view, &response.contours, &markers)
        }
        (DrawFormat::Svg, Some(geo)) => {
            let markers = markers(&|p| geo.pixel(p));
            map_contours(&mut response.contours, |p| geo.pixel(p));
            let (width, height) = geo.scenario.calibration.size();
            let view = SvgView {
                width,
                height,
                background: args
                    .background
                    .clone()
                    .or_else(|| geo.scenario.calibration.image.clone()),
            };
            export::svg(&view, &response.contours, &markers)
        }
    };
    emit(args.out.as_deref(), &text)
}

fn metrics(args: &MetricsArgs) -> Result<(), CliError> {
    let ctx = context(&args.input, Some(&args.grid), None)?;
    let r = api::region_metrics_with(&ctx.request, ctx.options)?;
    let text = match args.format {
        TextFormat::Json => pretty(&r),
        TextFormat::Text => {
            let (area_unit, length_unit) = if ctx.geo.is_some() { (" km2", " km") } else { ("", "") };
            let m = &r.metrics;
            format!(
                "s               {}{length_unit}\ns0              {}{length_unit}\narea            {}{area_unit}\narea_error      {}{area_unit}\nperimeter       {}{length_unit}\nperimeter_error {}{length_unit}\ngrid_step       {}{length_unit}\n",
                m.s, r.s0, m.area, m.area_error, m.perimeter, m.perimeter_error, m.grid_step
            )
        }
    };
    emit(args.out.as_deref(), &text)
}

fn serve(args: &ServeArgs) -> Result<(), CliError> {
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(crate::http::serve(SocketAddr::new(args.host, args.port)))?;
    Ok(())
}
