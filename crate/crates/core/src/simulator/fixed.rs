use serde::{Deserialize, Serialize};

use super::demand::access_time;
use super::SimError;
use crate::model::{CostParams, GridGeometry, PassengerTimes, Request, ServiceConfig, TripCosts};

/// Terminal departures of the fixed-route service and its stop timetable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedSchedule {
    /// Terminal departure times (h), spaced exactly one headway apart.
    pub departures: Vec<f64>,
    stop_chainages: Vec<f64>,
    v_d: f64,
    t_s: f64,
    gl_x: f64,
}

impl FixedSchedule {
    pub fn new(grid: &GridGeometry, svc: &ServiceConfig) -> Self {
        let departures = (0..svc.departures()).map(|j| j as f64 * svc.headway).collect();
        Self::with_departures(grid, svc, departures)
    }

    pub fn with_departures(grid: &GridGeometry, svc: &ServiceConfig, departures: Vec<f64>) -> Self {
        Self {
            departures,
            stop_chainages: grid.stop_chainages.clone(),
            v_d: svc.v_d,
            t_s: svc.t_s,
            gl_x: grid.gl_x,
        }
    }

    pub fn n_stops(&self) -> usize {
        self.stop_chainages.len()
    }

    /// Time the bus that left the terminal at `departure` reaches stop `s`,
    /// having dwelled at every earlier stop.
    pub fn stop_arrival(&self, s: usize, departure: f64) -> f64 {
        departure + self.stop_chainages[s] / self.v_d + s as f64 * self.t_s
    }

    /// Ride time from boarding at stop `s` to the end of the route, dwelling
    /// at every stop strictly in between.
    pub fn ride_time(&self, s: usize) -> f64 {
        let between = self.n_stops().saturating_sub(s + 1);
        (self.gl_x - self.stop_chainages[s]) / self.v_d + self.t_s * between as f64
    }

    /// Time the bus reaches the end of the route.
    pub fn end_time(&self, departure: f64) -> f64 {
        departure + self.gl_x / self.v_d + self.n_stops() as f64 * self.t_s
    }
}

/// Costs of one fixed-route departure for the passengers it carries.
///
/// `boardings` pairs each carried request with its boarding stop. Access is
/// the rectilinear walk to that stop; wait runs from reaching the stop to the
/// bus arriving there.
pub fn evaluate_fixed_trip(
    boardings: &[(Request, usize)],
    departure: f64,
    sched: &FixedSchedule,
    cost: &CostParams,
    grid: &GridGeometry,
    svc: &ServiceConfig,
) -> Result<TripCosts, SimError> {
    let mut per_passenger = Vec::with_capacity(boardings.len());
    for (r, s) in boardings {
        let walk = ((r.x - grid.stop_chainages[*s]).abs() + r.y.abs()) / svc.v_w;
        let wait = sched.stop_arrival(*s, departure) - (r.t_k + walk);
        if wait < -1e-9 {
            return Err(SimError::NegativeWait { request: r.id, wait });
        }
        per_passenger.push(PassengerTimes {
            request: r.id,
            t_k: r.t_k,
            wait: wait.max(0.0),
            ivtt: sched.ride_time(*s),
            access: walk,
        });
    }
    Ok(price(per_passenger, cost.gamma_o * grid.gl_x, cost))
}

/// Monetizes per-passenger times; `c_o` is already in dollars.
pub(crate) fn price(per_passenger: Vec<PassengerTimes>, c_o: f64, cost: &CostParams) -> TripCosts {
    let (mut a, mut w, mut r) = (0.0, 0.0, 0.0);
    for p in &per_passenger {
        a += p.access;
        w += p.wait;
        r += p.ivtt;
    }
    TripCosts {
        c_a: cost.gamma_a * cost.vot * a,
        c_w: cost.gamma_w * cost.vot * w,
        c_r: cost.gamma_r * cost.vot * r,
        c_o,
        per_passenger,
    }
}

/// Boarding stop and the time the passenger is ready there.
pub(crate) fn ready_at_stop(r: &Request, grid: &GridGeometry, svc: &ServiceConfig) -> (usize, f64) {
    let (s, walk) = access_time(grid, svc, r.x, r.y);
    (s, r.t_k + walk)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets;
    use approx::assert_abs_diff_eq;

    fn req(id: u32, x: f64, y: f64, t_k: f64) -> Request {
        Request { id, x, y, t_k, home_stop: 0 }
    }

    #[test]
    fn stop_arrivals_increase_along_the_route() {
        let s = presets::model1();
        let sched = FixedSchedule::new(&s.grid, &s.service);
        assert_eq!(sched.departures.len(), 12);
        for k in 1..sched.n_stops() {
            assert!(sched.stop_arrival(k, 0.25) > sched.stop_arrival(k - 1, 0.25));
        }
        assert_abs_diff_eq!(sched.departures[3] - sched.departures[2], 0.25);
    }

    #[test]
    fn passenger_at_stop_with_bus_on_time_has_zero_wait() {
        let s = presets::model1();
        let sched = FixedSchedule::new(&s.grid, &s.service);
        let stop = 15;
        let y = 0.1;
        let walk = y / s.service.v_w;
        let t_k = sched.stop_arrival(stop, 1.0) - walk;
        let r = req(0, 6.0, y, t_k);
        let c = evaluate_fixed_trip(&[(r, stop)], 1.0, &sched, &s.cost, &s.grid, &s.service).unwrap();
        assert_abs_diff_eq!(c.per_passenger[0].wait, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.per_passenger[0].access, walk, epsilon = 1e-15);
    }

    #[test]
    fn access_and_ride_distance_by_hand() {
        let s = presets::model1();
        let sched = FixedSchedule::new(&s.grid, &s.service);
        let r = req(0, 6.0, 0.2, 0.5);
        let c = evaluate_fixed_trip(&[(r, 15)], 1.0, &sched, &s.cost, &s.grid, &s.service).unwrap();
        let p = &c.per_passenger[0];
        assert_abs_diff_eq!(p.access * 60.0, 3.0, epsilon = 1e-12);
        let dwell = s.service.t_s * 9.0;
        assert_abs_diff_eq!(p.ivtt, 4.0 / s.service.v_d + dwell, epsilon = 1e-12);
        assert_abs_diff_eq!(c.c_o, 10.0);
        assert_abs_diff_eq!(c.total(), c.c_a + c.c_w + c.c_r + c.c_o);
    }

    #[test]
    fn bus_before_passenger_is_an_assignment_error() {
        let s = presets::model1();
        let sched = FixedSchedule::new(&s.grid, &s.service);
        let r = req(4, 6.0, 0.0, 2.0);
        assert!(matches!(
            evaluate_fixed_trip(&[(r, 15)], 1.0, &sched, &s.cost, &s.grid, &s.service),
            Err(SimError::NegativeWait { request: 4, .. })
        ));
    }
}
