//! Route models for real bus routes built from stop-boarding tables.
//!
//! The input is a CSV with one row per stop and these columns (header names
//! are matched case-insensitively, extra columns are ignored):
//!
//! | column        | required | meaning                                              |
//! |---------------|----------|------------------------------------------------------|
//! | `stop_id`     | yes      | stop identifier                                      |
//! | `routes`      | yes      | routes serving the stop, separated by `,` `;` or `/` |
//! | `boardings`   | yes      | average weekday boardings (passengers/day)           |
//! | `chainage_km` | one of   | distance along the route axis                        |
//! | `lat`, `lon`  | one of   | WGS84 position, projected onto the route axis        |
//! | `gl_y_km`     | no       | catchment half-width override at this stop           |
//!
//! Boardings only set where demand appears along the route; the hourly rate
//! and headway come from the case configuration.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Catchment, CostParams, GridGeometry, RunConfig, Scenario, ServiceConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StopRecord {
    pub stop_id: String,
    pub route: String,
    /// Distance along the route axis (km).
    pub chainage: f64,
    /// Average weekday boardings (passengers/day).
    pub boardings: f64,
    /// Catchment half-width at this stop (km), if it differs from the default.
    pub gl_y: Option<f64>,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("missing column {0:?}")]
    MissingColumn(&'static str),
    #[error("line {line}: column {column:?} has bad value {value:?}")]
    BadValue {
        line: u64,
        column: &'static str,
        value: String,
    },
    #[error("no stops for route {0:?}")]
    NoStops(String),
    #[error("at least two stops are needed, found {0}")]
    TooFewStops(usize),
    #[error("all boardings are zero; stop weights are undefined")]
    ZeroBoardings,
    #[error("stop {stop_id} at chainage {chainage} km lies outside the route")]
    OutsideRoute { stop_id: String, chainage: f64 },
}

/// Straight route axis between two WGS84 points, used to turn stop
/// positions into chainages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteAxis {
    pub start: (f64, f64),
    pub end: (f64, f64),
}

const EARTH_RADIUS_KM: f64 = 6371.0;

impl RouteAxis {
    /// Local east/north offset (km) of `(lat, lon)` from the axis start.
    fn local(&self, lat: f64, lon: f64) -> (f64, f64) {
        let lat0 = self.start.0.to_radians();
        let east = (lon - self.start.1).to_radians() * lat0.cos() * EARTH_RADIUS_KM;
        let north = (lat - self.start.0).to_radians() * EARTH_RADIUS_KM;
        (east, north)
    }

    /// Distance along the axis of the projection of `(lat, lon)` (km).
    pub fn chainage(&self, lat: f64, lon: f64) -> f64 {
        let (ex, ey) = self.local(self.end.0, self.end.1);
        let len = ex.hypot(ey);
        let (px, py) = self.local(lat, lon);
        (px * ex + py * ey) / len
    }
}

enum Position {
    Chainage(usize),
    LatLon(usize, usize),
}

fn serves(routes: &str, route: &str) -> bool {
    routes.split([',', ';', '/', ' ']).any(|r| r.trim() == route)
}

/// Reads stop records for `route` (all rows when `None`).
///
/// Positions given as `lat`/`lon` are projected onto `axis`, or, when no axis
/// is given, onto the line from the first to the last stop of the route.
pub fn parse_boardings<R: Read>(
    input: R,
    route: Option<&str>,
    axis: Option<RouteAxis>,
) -> Result<Vec<StopRecord>, IngestError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(input);
    let csv_err = |e: csv::Error| IngestError::Csv {
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    };
    let headers = reader.headers().map_err(csv_err)?.clone();
    let wanted = route.unwrap_or("").to_string();
    if headers.iter().all(|h| h.is_empty()) {
        return Err(IngestError::NoStops(wanted));
    }
    let col = |name: &'static str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let need = |name: &'static str| col(name).ok_or(IngestError::MissingColumn(name));
    let stop_col = need("stop_id")?;
    let routes_col = need("routes")?;
    let boardings_col = need("boardings")?;
    let position = match (col("chainage_km"), col("lat"), col("lon")) {
        (Some(c), _, _) => Position::Chainage(c),
        (None, Some(la), Some(lo)) => Position::LatLon(la, lo),
        _ => return Err(IngestError::MissingColumn("chainage_km")),
    };
    let gl_y_col = col("gl_y_km");

    let mut rows = Vec::new();
    let mut latlon = Vec::new();
    for result in reader.records() {
        let rec = result.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| rec.get(i).unwrap_or("");
        let routes = field(routes_col);
        if route.is_some_and(|r| !serves(routes, r)) {
            continue;
        }
        let number = |i: usize, column: &'static str| -> Result<f64, IngestError> {
            field(i)
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| IngestError::BadValue {
                    line,
                    column,
                    value: field(i).to_string(),
                })
        };
        let boardings = number(boardings_col, "boardings")?;
        if boardings < 0.0 {
            return Err(IngestError::BadValue {
                line,
                column: "boardings",
                value: field(boardings_col).to_string(),
            });
        }
        let chainage = match position {
            Position::Chainage(c) => number(c, "chainage_km")?,
            Position::LatLon(la, lo) => {
                latlon.push((number(la, "lat")?, number(lo, "lon")?));
                f64::NAN
            }
        };
        let gl_y = match gl_y_col {
            Some(c) if !field(c).is_empty() => Some(number(c, "gl_y_km")?).filter(|v| *v > 0.0),
            _ => None,
        };
        rows.push(StopRecord {
            stop_id: field(stop_col).to_string(),
            route: route.map_or_else(|| routes.to_string(), str::to_string),
            chainage,
            boardings,
            gl_y,
        });
    }
    if rows.is_empty() {
        return Err(IngestError::NoStops(wanted));
    }
    if !latlon.is_empty() {
        let axis = axis.unwrap_or(RouteAxis {
            start: latlon[0],
            end: latlon[latlon.len() - 1],
        });
        for (r, (lat, lon)) in rows.iter_mut().zip(latlon) {
            r.chainage = axis.chainage(lat, lon);
        }
    }
    Ok(rows)
}

/// Reads stop records from a file.
pub fn load_boardings(path: &Path, route: Option<&str>, axis: Option<RouteAxis>) -> Result<Vec<StopRecord>, IngestError> {
    let file = std::fs::File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_boardings(file, route, axis)
}

/// Service settings of a case study that do not come from boardings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteDefaults {
    /// Street block sizes (km).
    pub l_x: f64,
    pub l_y: f64,
    /// Catchment half-width where a stop has no override (km).
    pub gl_y: f64,
    /// Perceived passenger flow (passengers/h).
    pub lambda: f64,
    /// Headway (h).
    pub headway: f64,
    /// Bus speed in the suburb (km/h).
    pub v_d: f64,
    /// Fixed-route dwell per stop (h).
    pub t_s: f64,
    /// Dispersion MD(Y) for the closed-form indicators (km); `None` derives
    /// it from the stop catchments.
    pub md: Option<f64>,
}

impl RouteDefaults {
    /// Case defaults for a known route id, `None` for other routes.
    pub fn for_route(route: &str) -> Option<Self> {
        match route {
            "126" => Some(Self::cta126()),
            "84" => Some(Self::cta84()),
            _ => None,
        }
    }

    /// Jackson Blvd eastbound: 200 m catchment, 80 passengers/h every 15 min.
    pub fn cta126() -> Self {
        Self {
            l_x: 0.2,
            l_y: 0.1,
            gl_y: 0.2,
            lambda: 80.0,
            headway: 0.25,
            v_d: 30.0,
            t_s: 0.33 / 60.0,
            md: None,
        }
    }

    /// Peterson Ave eastbound: up to 800 m catchment, 50 passengers/h every 20 min.
    ///
    /// The catchment is wide only on part of the route, so screening uses
    /// the dispersion of the full 800 m width rather than the stop average.
    pub fn cta84() -> Self {
        Self {
            gl_y: 0.8,
            md: Some(2.0 * 0.8 / 3.0),
            lambda: 50.0,
            headway: 1.0 / 3.0,
            ..Self::cta126()
        }
    }
}

/// Service values taken from the case configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceOverrides {
    pub lambda: f64,
    pub headway: f64,
    pub v_d: f64,
    pub t_s: f64,
    pub md: Option<f64>,
}

/// Grid geometry from stop records: stops sorted by chainage, duplicates
/// merged, weights proportional to boardings, route length at the last stop.
pub fn build_route_model(
    records: &[StopRecord],
    defaults: &RouteDefaults,
) -> Result<(GridGeometry, ServiceOverrides), IngestError> {
    let mut stops: Vec<StopRecord> = records.to_vec();
    stops.sort_by(|a, b| a.chainage.total_cmp(&b.chainage));
    let mut merged: Vec<StopRecord> = Vec::with_capacity(stops.len());
    for s in stops {
        match merged.last_mut() {
            Some(last) if (last.chainage - s.chainage).abs() < 1e-9 => {
                last.boardings += s.boardings;
                last.gl_y = match (last.gl_y, s.gl_y) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    (a, b) => a.or(b),
                };
            }
            _ => merged.push(s),
        }
    }
    if merged.len() < 2 {
        return Err(IngestError::TooFewStops(merged.len()));
    }
    let gl_x = merged[merged.len() - 1].chainage;
    if let Some(s) = merged.iter().find(|s| s.chainage < 0.0) {
        return Err(IngestError::OutsideRoute {
            stop_id: s.stop_id.clone(),
            chainage: s.chainage,
        });
    }
    let total: f64 = merged.iter().map(|s| s.boardings).sum();
    if total <= 0.0 {
        return Err(IngestError::ZeroBoardings);
    }
    let widths: Vec<f64> = merged.iter().map(|s| s.gl_y.unwrap_or(defaults.gl_y)).collect();
    let gl_y = if widths.iter().all(|w| *w == widths[0]) {
        Catchment::Uniform(widths[0])
    } else {
        Catchment::PerStop(widths)
    };
    let span = gl_x - merged[0].chainage;
    let grid = GridGeometry {
        l_x: defaults.l_x,
        l_y: defaults.l_y,
        gl_x,
        gl_y,
        stop_chainages: merged.iter().map(|s| s.chainage).collect(),
        stop_weights: merged.iter().map(|s| s.boardings / total).collect(),
        d_xs: span / (merged.len() - 1) as f64,
    };
    let overrides = ServiceOverrides {
        lambda: defaults.lambda,
        headway: defaults.headway,
        v_d: defaults.v_d,
        t_s: defaults.t_s,
        md: defaults.md,
    };
    Ok((grid, overrides))
}

/// Complete scenario for a case study, other settings taken from `base`.
///
/// The maximum access time is the walk across the widest catchment plus
/// half a block.
pub fn case_scenario(
    name: &str,
    grid: GridGeometry,
    overrides: &ServiceOverrides,
    cost: CostParams,
    base: &ServiceConfig,
    run: RunConfig,
) -> Scenario {
    let s_o = (grid.gl_y.max() + grid.l_x / 2.0) / base.v_w;
    let service = ServiceConfig {
        lambda: overrides.lambda,
        headway: overrides.headway,
        v_d: overrides.v_d,
        t_s: overrides.t_s,
        s_o,
        fixed_capacity: None,
        ..base.clone()
    };
    Scenario {
        name: name.to_string(),
        cost,
        grid,
        service,
        run: RunConfig {
            md: overrides.md.or(run.md),
            ..run
        },
    }
}
