//! Domain types shared by every other module.
//!
//! Everything is stored in kilometers, hours and dollars. Conversions from
//! minutes, meters or seconds happen when scenario files are read (see
//! [`file`]).

mod file;
mod validate;

pub use file::{load_scenario, parse_scenario, scenario_to_json, ScenarioFileError};
pub use validate::{validate_scenario, Rule, ValidationErrors, Violation};

use serde::{Deserialize, Serialize};

/// Monetized-cost and value-of-time parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    /// Access-time penalty multiplier.
    pub gamma_a: f64,
    /// Waiting-time penalty multiplier.
    pub gamma_w: f64,
    /// Riding-time penalty multiplier (the numéraire).
    pub gamma_r: f64,
    /// Operator cost per vehicle-km ($/km).
    pub gamma_o: f64,
    /// Value of time ($/h).
    pub vot: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            gamma_a: 2.0,
            gamma_w: 1.5,
            gamma_r: 1.0,
            gamma_o: 1.0,
            vot: 16.5,
        }
    }
}

/// Catchment half-width: one value for the whole route or one per stop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Catchment {
    Uniform(f64),
    PerStop(Vec<f64>),
}

impl Catchment {
    pub fn at(&self, stop: usize) -> f64 {
        match self {
            Catchment::Uniform(w) => *w,
            Catchment::PerStop(ws) => ws[stop],
        }
    }

    pub fn max(&self) -> f64 {
        match self {
            Catchment::Uniform(w) => *w,
            Catchment::PerStop(ws) => ws.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            Catchment::Uniform(w) => vec![*w],
            Catchment::PerStop(ws) => ws.clone(),
        }
    }
}

/// Street grid of the suburb section and the existing fixed-route stops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    /// Block length along the route (km).
    pub l_x: f64,
    /// Block length across the route (km).
    pub l_y: f64,
    /// Route length through the suburb (km).
    pub gl_x: f64,
    /// Catchment half-width (km).
    pub gl_y: Catchment,
    /// Stop positions along the route, strictly increasing (km).
    pub stop_chainages: Vec<f64>,
    /// Share of demand generated around each stop.
    pub stop_weights: Vec<f64>,
    /// Fixed-route stop spacing used for demand generation (km).
    pub d_xs: f64,
}

impl GridGeometry {
    pub fn n_stops(&self) -> usize {
        self.stop_chainages.len()
    }

    pub fn gl_y_at(&self, stop: usize) -> f64 {
        self.gl_y.at(stop)
    }

    /// Index of the stop nearest to `x`. Ties go to the downstream stop.
    pub fn nearest_stop(&self, x: f64) -> usize {
        let stops = &self.stop_chainages;
        let upper = stops.partition_point(|&s| s < x);
        if upper == 0 {
            return 0;
        }
        if upper == stops.len() {
            return stops.len() - 1;
        }
        let below = x - stops[upper - 1];
        let above = stops[upper] - x;
        if above <= below {
            upper
        } else {
            upper - 1
        }
    }

    /// Demand-weighted mean catchment half-width.
    pub fn mean_gl_y(&self) -> f64 {
        match &self.gl_y {
            Catchment::Uniform(w) => *w,
            Catchment::PerStop(ws) => ws
                .iter()
                .zip(&self.stop_weights)
                .map(|(w, p)| w * p)
                .sum(),
        }
    }
}

/// Operating parameters shared by the fixed route and the semi-on-demand service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceConfig {
    /// Terminal departure headway (h).
    pub headway: f64,
    /// Minibus capacity (passengers).
    pub capacity: u32,
    /// Capacity of the existing fixed-route bus; `None` means the same as `capacity`.
    pub fixed_capacity: Option<u32>,
    pub n_parallel: u32,
    pub n_zones: u32,
    /// Street speed excluding dwell (km/h).
    pub v_d: f64,
    /// Walking speed (km/h).
    pub v_w: f64,
    /// Highway speed for zonal express legs (km/h); required when `n_zones > 1`.
    pub v_h: Option<f64>,
    /// Fixed-route dwell per stop (h).
    pub t_s: f64,
    /// Semi-on-demand dwell per pickup point (h).
    pub t_s_prime: f64,
    /// Demand rate (passengers/h).
    pub lambda: f64,
    /// Maximum access time (h).
    pub s_o: f64,
    /// Simulated horizon (h).
    pub horizon: f64,
    /// Request-time window whose passengers are counted (h).
    pub warmup_window: (f64, f64),
}

impl ServiceConfig {
    pub fn fixed_capacity(&self) -> u32 {
        self.fixed_capacity.unwrap_or(self.capacity)
    }

    /// Length of the counted window (h).
    pub fn counted_hours(&self) -> f64 {
        self.warmup_window.1 - self.warmup_window.0
    }

    pub fn counts(&self, t_k: f64) -> bool {
        t_k >= self.warmup_window.0 && t_k < self.warmup_window.1
    }

    /// Number of terminal departures in `[0, horizon)`.
    pub fn departures(&self) -> usize {
        let n = (self.horizon / self.headway - 1e-9).ceil();
        n.max(0.0) as usize
    }
}

/// Replication settings and analytic overrides carried alongside a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub replications: usize,
    pub seed: u64,
    /// Dispersion MD(Y) used by the closed-form indicators; defaults to
    /// two thirds of the demand-weighted catchment half-width.
    pub md: Option<f64>,
}

pub const DEFAULT_SEED: u64 = 20_220_516;

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            replications: 10_000,
            seed: DEFAULT_SEED,
            md: None,
        }
    }
}

/// A complete scenario: the unit a scenario file describes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub cost: CostParams,
    pub grid: GridGeometry,
    pub service: ServiceConfig,
    pub run: RunConfig,
}

impl Scenario {
    /// Checks every invariant; on success returns the non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<Violation>, ValidationErrors> {
        validate_scenario(&self.cost, &self.grid, &self.service)
    }

    /// MD(Y) for the closed-form indicators.
    pub fn md(&self) -> f64 {
        self.run
            .md
            .unwrap_or_else(|| 2.0 * self.grid.mean_gl_y() / 3.0)
    }
}

/// One passenger's trip request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: u32,
    /// Demand position along the route (km).
    pub x: f64,
    /// Signed offset from the route axis (km).
    pub y: f64,
    /// Time the passenger starts the trip (h from scenario start).
    pub t_k: f64,
    /// Stop whose catchment generated the request.
    pub home_stop: usize,
}

/// What happens at a waypoint of a trip diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaypointEvent {
    Move,
    Pickup,
    Dwell,
    Express,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub x: f64,
    pub y: f64,
    /// Time the bus reaches (or, for dwell events, leaves) the point (h).
    pub time: f64,
    pub event: WaypointEvent,
}

/// Pickup record for one passenger on a semi-on-demand trip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pickup {
    pub request: u32,
    pub t_k: f64,
    /// Bus arrival at the pickup point (h).
    pub time: f64,
    pub x: f64,
    pub y: f64,
    /// Distinct pickup points still to be served after this one.
    pub remaining_stops: u32,
}

/// Highway leg travelled without pickups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpressLeg {
    pub length: f64,
    pub speed: f64,
}

/// Street path of one semi-on-demand trip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutePlan {
    pub departure: f64,
    pub waypoints: Vec<Waypoint>,
    /// Distance travelled along the route direction (km).
    pub d_x: f64,
    /// Distance travelled across the route direction (km).
    pub d_y: f64,
    pub pickups: Vec<Pickup>,
    pub express_legs: Vec<ExpressLeg>,
    /// Arrival at the end of the street section, before any express leg (h).
    pub street_end: f64,
}

impl RoutePlan {
    pub fn express_length(&self) -> f64 {
        self.express_legs.iter().map(|l| l.length).sum()
    }

    pub fn express_time(&self) -> f64 {
        self.express_legs.iter().map(|l| l.length / l.speed).sum()
    }

    /// Time the trip leaves the suburb section (h).
    pub fn end_time(&self) -> f64 {
        self.street_end + self.express_time()
    }

    /// Total distance driven, street plus express (km).
    pub fn distance(&self) -> f64 {
        self.d_x + self.d_y + self.express_length()
    }
}

/// Per-passenger times (h).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PassengerTimes {
    pub request: u32,
    pub t_k: f64,
    pub wait: f64,
    pub ivtt: f64,
    /// Walk to the stop; zero for semi-on-demand pickups.
    pub access: f64,
}

/// Cost breakdown of one trip ($).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TripCosts {
    pub c_a: f64,
    pub c_w: f64,
    pub c_r: f64,
    pub c_o: f64,
    pub per_passenger: Vec<PassengerTimes>,
}

impl TripCosts {
    pub fn total(&self) -> f64 {
        self.c_a + self.c_w + self.c_r + self.c_o
    }

    pub fn k_j(&self) -> usize {
        self.per_passenger.len()
    }
}

/// Median with a 95% percentile interval, plus the sample mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub median: f64,
    pub lower: f64,
    pub upper: f64,
    pub mean: f64,
}

/// Replication statistics for one service mode.
///
/// Waits and IVTT are per-passenger means in hours; cost rows are dollars
/// with passenger costs over the counted window and operator cost over the
/// whole horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioStats {
    pub wait: Summary,
    pub ivtt: Summary,
    pub c_a: Summary,
    pub c_w: Summary,
    pub c_r: Summary,
    pub c_o: Summary,
    pub tc: Summary,
    pub delta_tc: Summary,
    pub passengers: Summary,
    /// Cross-street (y) distance per trip, km; zero for fixed routes.
    pub trip_d_y: Summary,
    /// Counted requests still waiting at the end of the horizon.
    pub unserved: Summary,
    pub replications: usize,
}

/// Reference scenarios used by the bundled scenario files and the tests.
pub mod presets {
    use super::*;

    /// Stops every 0.4 km from the terminal, 25 of them on a 10 km suburb.
    pub fn model1_grid() -> GridGeometry {
        let stops: Vec<f64> = (0..25).map(|i| i as f64 * 0.4).collect();
        let n = stops.len();
        GridGeometry {
            l_x: 0.2,
            l_y: 0.1,
            gl_x: 10.0,
            gl_y: Catchment::Uniform(4.0 * 8.0 / 60.0),
            stop_weights: vec![1.0 / n as f64; n],
            stop_chainages: stops,
            d_xs: 0.4,
        }
    }

    pub fn model1_service() -> ServiceConfig {
        ServiceConfig {
            headway: 0.25,
            capacity: 30,
            fixed_capacity: None,
            n_parallel: 1,
            n_zones: 1,
            v_d: 35.0,
            v_w: 4.0,
            v_h: None,
            t_s: 0.4 / 60.0,
            t_s_prime: 0.4 / 60.0,
            lambda: 60.0,
            s_o: 8.0 / 60.0,
            horizon: 3.0,
            warmup_window: (1.0, 2.0),
        }
    }

    pub fn model1() -> Scenario {
        Scenario {
            name: "model1".into(),
            cost: CostParams::default(),
            grid: model1_grid(),
            service: model1_service(),
            run: RunConfig::default(),
        }
    }

    /// Model 1 with a 2 km catchment served by two parallel routes.
    pub fn model2() -> Scenario {
        let mut s = model1();
        s.name = "model2".into();
        s.grid.gl_y = Catchment::Uniform(2.0);
        s.service.s_o = 0.5;
        s.service.n_parallel = 2;
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_stop_breaks_ties_downstream() {
        let g = presets::model1_grid();
        assert_eq!(g.nearest_stop(0.2), 1);
        assert_eq!(g.nearest_stop(0.19), 0);
        assert_eq!(g.nearest_stop(-0.3), 0);
        assert_eq!(g.nearest_stop(9.9), 24);
        assert_eq!(g.nearest_stop(6.0), 15);
    }

    #[test]
    fn departures_cover_horizon() {
        let svc = presets::model1_service();
        assert_eq!(svc.departures(), 12);
        let mut svc84 = svc.clone();
        svc84.headway = 1.0 / 3.0;
        assert_eq!(svc84.departures(), 9);
    }

    #[test]
    fn default_md_is_two_thirds_of_catchment() {
        let s = presets::model1();
        assert!((s.md() - 0.355_555_555).abs() < 1e-6);
    }
}
