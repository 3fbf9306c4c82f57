//! Map calibration, pixel/geographic conversion and named scenarios.
//!
//! Scenario files are small `key = value` documents:
//!
//! ```text
//! name = South Stream
//! s = 2500            # optional default level, km in the planar frame
//!
//! [map]
//! image = south-stream.png   # optional
//! width = 1735
//! height = 1000
//! west = 17
//! east = 41
//! south = 38
//! north = 48
//!
//! [focus]                    # exactly three
//! name = Subotica
//! lon = 19.6656
//! lat = 46.1003
//! weight = 1                 # optional, default 1
//!
//! [reference]                # optional landmarks, any number
//! name = Pleven
//! lon = 24.6067
//! lat = 43.4170
//! ```

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fermat::{solve_weber, SolveOptions, SolveResult};
use crate::geometry::{Focus, FocusTriple, Metric, Point2};

/// Mean Earth radius in km, for the planar frame's scale.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

/// Slack on bounds checks so round trips through floating point stay legal.
const BOUNDS_SLACK: f64 = 1e-9;

/// A longitude/latitude pair in decimal degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint {
    pub lon: f64,
    pub lat: f64,
}

impl GeoPoint {
    pub const fn new(lon: f64, lat: f64) -> Self {
        GeoPoint { lon, lat }
    }
}

/// Equirectangular affine calibration of a map image: pixel `x` grows east,
/// pixel `y` grows south.
#[derive(Debug, Clone, PartialEq)]
pub struct MapCalibration {
    pub image: Option<String>,
    width: f64,
    height: f64,
    west: f64,
    east: f64,
    south: f64,
    north: f64,
}

impl MapCalibration {
    pub fn new(width: f64, height: f64, west: f64, east: f64, south: f64, north: f64) -> Result<Self> {
        let all = [width, height, west, east, south, north];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("map", "all calibration values must be finite"));
        }
        if !(width > 0.0 && height > 0.0) {
            return Err(Error::invalid("map", "image size must be positive"));
        }
        if west >= east {
            return Err(Error::invalid("map", "west must be less than east"));
        }
        if south >= north {
            return Err(Error::invalid("map", "south must be less than north"));
        }
        Ok(MapCalibration {
            image: None,
            width,
            height,
            west,
            east,
            south,
            north,
        })
    }

    pub fn with_image(mut self, image: impl Into<String>) -> Self {
        self.image = Some(image.into());
        self
    }

    pub fn size(&self) -> (f64, f64) {
        (self.width, self.height)
    }

    /// `(west, east, south, north)` in degrees.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        (self.west, self.east, self.south, self.north)
    }

    pub fn center(&self) -> GeoPoint {
        GeoPoint::new(0.5 * (self.west + self.east), 0.5 * (self.south + self.north))
    }

    pub fn contains(&self, p: GeoPoint) -> bool {
        let sx = BOUNDS_SLACK * (self.east - self.west);
        let sy = BOUNDS_SLACK * (self.north - self.south);
        p.lon >= self.west - sx && p.lon <= self.east + sx && p.lat >= self.south - sy && p.lat <= self.north + sy
    }

    pub fn geo_to_pixel(&self, p: GeoPoint) -> Result<Point2> {
        if !self.contains(p) {
            return Err(Error::OutOfBounds { x: p.lon, y: p.lat });
        }
        Ok(self.project(p))
    }

    pub fn pixel_to_geo(&self, q: Point2) -> Result<GeoPoint> {
        let sx = BOUNDS_SLACK * self.width;
        let sy = BOUNDS_SLACK * self.height;
        if !(q.x >= -sx && q.x <= self.width + sx && q.y >= -sy && q.y <= self.height + sy) {
            return Err(Error::OutOfBounds { x: q.x, y: q.y });
        }
        Ok(self.unproject(q))
    }

    /// The affine map without bounds checks, for geometry that may leave
    /// the image (curves near the border).
    pub fn project(&self, p: GeoPoint) -> Point2 {
        Point2::new(
            self.width * (p.lon - self.west) / (self.east - self.west),
            self.height * (self.north - p.lat) / (self.north - self.south),
        )
    }

    pub fn unproject(&self, q: Point2) -> GeoPoint {
        GeoPoint::new(
            self.west + q.x / self.width * (self.east - self.west),
            self.north - q.y / self.height * (self.north - self.south),
        )
    }
}

pub fn geo_to_pixel(p: GeoPoint, cal: &MapCalibration) -> Result<Point2> {
    cal.geo_to_pixel(p)
}

pub fn pixel_to_geo(q: Point2, cal: &MapCalibration) -> Result<GeoPoint> {
    cal.pixel_to_geo(q)
}

/// Local planar frame in km: longitude differences are shrunk by the cosine
/// of a reference latitude, both axes scaled by the Earth radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarFrame {
    origin: GeoPoint,
    cos_lat: f64,
}

impl PlanarFrame {
    pub fn new(origin: GeoPoint) -> Self {
        PlanarFrame {
            origin,
            cos_lat: origin.lat.to_radians().cos(),
        }
    }

    pub fn origin(&self) -> GeoPoint {
        self.origin
    }

    pub fn to_plane(&self, p: GeoPoint) -> Point2 {
        Point2::new(
            EARTH_RADIUS_KM * (p.lon - self.origin.lon).to_radians() * self.cos_lat,
            EARTH_RADIUS_KM * (p.lat - self.origin.lat).to_radians(),
        )
    }

    pub fn to_geo(&self, q: Point2) -> GeoPoint {
        GeoPoint::new(
            self.origin.lon + (q.x / (EARTH_RADIUS_KM * self.cos_lat)).to_degrees(),
            self.origin.lat + (q.y / EARTH_RADIUS_KM).to_degrees(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedFocus {
    pub name: String,
    pub location: GeoPoint,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Landmark {
    pub name: String,
    pub location: GeoPoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub foci: [NamedFocus; 3],
    pub calibration: MapCalibration,
    /// Default level in km of the planar frame.
    pub default_s: Option<f64>,
    pub references: Vec<Landmark>,
}

/// Minimizer of a scenario, in the planar frame and on the map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioSolution {
    pub planar: SolveResult,
    pub location: GeoPoint,
}

impl Scenario {
    /// Frame centred on the foci's mean position; the cosine correction uses
    /// their mean latitude.
    pub fn frame(&self) -> PlanarFrame {
        let n = self.foci.len() as f64;
        let lon = self.foci.iter().map(|f| f.location.lon).sum::<f64>() / n;
        let lat = self.foci.iter().map(|f| f.location.lat).sum::<f64>() / n;
        PlanarFrame::new(GeoPoint::new(lon, lat))
    }

    fn triple(&self, mut position: impl FnMut(GeoPoint) -> Result<Point2>) -> Result<FocusTriple> {
        let mut foci = Vec::with_capacity(3);
        for f in &self.foci {
            foci.push(Focus::new(position(f.location)?, f.weight)?);
        }
        Ok(FocusTriple::new(foci[0], foci[1], foci[2]))
    }

    /// Foci in the km planar frame of [`Scenario::frame`].
    pub fn planar_foci(&self) -> Result<FocusTriple> {
        let frame = self.frame();
        self.triple(|g| Ok(frame.to_plane(g)))
    }

    /// Foci in image pixel coordinates.
    pub fn pixel_foci(&self) -> Result<FocusTriple> {
        self.triple(|g| self.calibration.geo_to_pixel(g))
    }

    pub fn solve(&self, metric: Metric, options: SolveOptions) -> Result<ScenarioSolution> {
        let planar = solve_weber(&self.planar_foci()?, metric, options)?;
        Ok(ScenarioSolution {
            location: self.frame().to_geo(planar.point),
            planar,
        })
    }

    /// Solves on the raw pixel grid of the map image and maps back.
    pub fn solve_in_pixels(&self, metric: Metric, options: SolveOptions) -> Result<GeoPoint> {
        let r = solve_weber(&self.pixel_foci()?, metric, options)?;
        Ok(self.calibration.unproject(r.point))
    }

    pub fn reference(&self, name: &str) -> Option<GeoPoint> {
        self.references
            .iter()
            .find(|r| r.name.eq_ignore_ascii_case(name))
            .map(|r| r.location)
    }
}

pub const SOUTH_STREAM: &str = include_str!("../scenarios/south-stream.scenario");
pub const SOUTH_STREAM_VARNA: &str = include_str!("../scenarios/south-stream-varna.scenario");

/// `(file name, contents)` of the scenarios shipped with the crate.
pub fn bundled_scenarios() -> [(&'static str, &'static str); 2] {
    [
        ("south-stream.scenario", SOUTH_STREAM),
        ("south-stream-varna.scenario", SOUTH_STREAM_VARNA),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Top,
    Map,
    Focus,
    Reference,
}

impl Section {
    fn keys(self) -> &'static [&'static str] {
        match self {
            Section::Top => &["name", "s"],
            Section::Map => &["image", "width", "height", "west", "east", "south", "north"],
            Section::Focus => &["name", "lon", "lat", "weight"],
            Section::Reference => &["name", "lon", "lat"],
        }
    }

    fn required(self) -> &'static [&'static str] {
        match self {
            Section::Top => &[],
            Section::Map => &["width", "height", "west", "east", "south", "north"],
            Section::Focus | Section::Reference => &["name", "lon", "lat"],
        }
    }
}

struct Block {
    section: Section,
    line: usize,
    entries: BTreeMap<&'static str, (usize, String)>,
}

impl Block {
    fn new(section: Section, line: usize) -> Self {
        Block {
            section,
            line,
            entries: BTreeMap::new(),
        }
    }

    fn text(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, raw)) => match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(Some(v)),
                _ => Err(Error::Parse {
                    line: *line,
                    message: format!("`{key}` must be a finite number, got `{raw}`"),
                }),
            },
        }
    }

    fn require(&self, key: &str) -> Result<f64> {
        self.number(key)?.ok_or_else(|| Error::Parse {
            line: self.line,
            message: format!("missing `{key}`"),
        })
    }

    fn check_required(&self) -> Result<()> {
        for key in self.section.required() {
            if !self.entries.contains_key(key) {
                return Err(Error::Parse {
                    line: self.line,
                    message: format!("section is missing `{key}`"),
                });
            }
        }
        Ok(())
    }
}

fn unquote(raw: &str) -> &str {
    raw.strip_prefix('"').and_then(|r| r.strip_suffix('"')).unwrap_or(raw)
}

/// Parses and validates a scenario document.
pub fn load_scenario(document: &str) -> Result<Scenario> {
    let mut blocks = vec![Block::new(Section::Top, 1)];
    for (index, raw_line) in document.lines().enumerate() {
        let line = index + 1;
        let content = match raw_line.find('#') {
            Some(k) => &raw_line[..k],
            None => raw_line,
        }
        .trim();
        if content.is_empty() {
            continue;
        }
        if let Some(header) = content.strip_prefix('[') {
            let name = header.strip_suffix(']').ok_or_else(|| Error::Parse {
                line,
                message: format!("malformed section header `{content}`"),
            })?;
            let section = match name.trim() {
                "map" => Section::Map,
                "focus" => Section::Focus,
                "reference" => Section::Reference,
                other => {
                    return Err(Error::Parse {
                        line,
                        message: format!("unknown section `[{other}]`"),
                    })
                }
            };
            blocks.push(Block::new(section, line));
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
            line,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let key = key.trim();
        let block = blocks.last_mut().expect("top-level block");
        let known = block
            .section
            .keys()
            .iter()
            .find(|k| **k == key)
            .ok_or_else(|| Error::Parse {
                line,
                message: format!("unknown field `{key}` in {:?} section", block.section),
            })?;
        if block
            .entries
            .insert(known, (line, unquote(value.trim()).to_string()))
            .is_some()
        {
            return Err(Error::Parse {
                line,
                message: format!("duplicate field `{key}`"),
            });
        }
    }

    let top = &blocks[0];
    let maps: Vec<&Block> = blocks.iter().filter(|b| b.section == Section::Map).collect();
    let map = match maps.as_slice() {
        [one] => *one,
        [] => {
            return Err(Error::Parse {
                line: document.lines().count().max(1),
                message: "missing [map] section".into(),
            })
        }
        [_, second, ..] => {
            return Err(Error::Parse {
                line: second.line,
                message: "more than one [map] section".into(),
            })
        }
    };
    map.check_required()?;
    let mut calibration = MapCalibration::new(
        map.require("width")?,
        map.require("height")?,
        map.require("west")?,
        map.require("east")?,
        map.require("south")?,
        map.require("north")?,
    )
    .map_err(|e| Error::Parse {
        line: map.line,
        message: e.to_string(),
    })?;
    if let Some(image) = map.text("image") {
        calibration = calibration.with_image(image);
    }

    let located = |block: &Block| -> Result<(String, GeoPoint)> {
        block.check_required()?;
        let location = GeoPoint::new(block.require("lon")?, block.require("lat")?);
        if !calibration.contains(location) {
            return Err(Error::Parse {
                line: block.line,
                message: format!("({}, {}) lies outside the map bounds", location.lon, location.lat),
            });
        }
        Ok((block.text("name").unwrap_or_default().to_string(), location))
    };

    let mut foci = Vec::new();
    let mut references = Vec::new();
    for block in &blocks {
        match block.section {
            Section::Focus => {
                let (name, location) = located(block)?;
                let weight = block.number("weight")?.unwrap_or(1.0);
                if weight <= 0.0 {
                    return Err(Error::Parse {
                        line: block.entries["weight"].0,
                        message: format!("weight must be positive, got {weight}"),
                    });
                }
                foci.push(NamedFocus { name, location, weight });
            }
            Section::Reference => {
                let (name, location) = located(block)?;
                references.push(Landmark { name, location });
            }
            _ => {}
        }
    }
    let foci: [NamedFocus; 3] = foci.try_into().map_err(|found: Vec<NamedFocus>| Error::Parse {
        line: document.lines().count().max(1),
        message: format!("expected exactly 3 [focus] sections, found {}", found.len()),
    })?;

    let default_s = top.number("s")?;
    if let Some(s) = default_s {
        if s <= 0.0 {
            return Err(Error::Parse {
                line: top.entries["s"].0,
                message: format!("s must be positive, got {s}"),
            });
        }
    }

    Ok(Scenario {
        name: top.text("name").unwrap_or("unnamed").to_string(),
        foci,
        calibration,
        default_s,
        references,
    })
}
