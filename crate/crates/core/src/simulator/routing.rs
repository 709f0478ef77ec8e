//! Rule-based routing of a semi-on-demand minibus on the street grid.
//!
//! Requests are served in order of their street `x`; within one cross-street
//! the bus sweeps `y` starting from the nearer extreme. Between consecutive
//! pickups it drives along the cross-street first and then along the
//! parallel street, so `x` never decreases and all vertical travel is the
//! sum of `|Δy|` plus the final return to the axis.

use super::lattice::{on_lattice, snap_to_streets, StreetPoint};
use super::SimError;
use crate::model::{
    CostParams, ExpressLeg, GridGeometry, PassengerTimes, Pickup, Request, RoutePlan, ServiceConfig, TripCosts,
    Waypoint, WaypointEvent,
};

/// A request waiting for a minibus, with its snapped pickup point.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Candidate {
    pub request: Request,
    pub point: StreetPoint,
    /// Left behind by an earlier full bus; boards ahead of newer requests.
    pub priority: bool,
}

impl Candidate {
    pub fn sort_key(&self) -> (i64, i64, u32) {
        (self.point.ix, self.point.iy, self.request.id)
    }
}

/// Street extent and onward express leg of one route variant.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Leg {
    pub start_x: f64,
    pub end_x: f64,
    pub express: Option<ExpressLeg>,
}

impl Leg {
    pub fn full(grid: &GridGeometry) -> Self {
        Self {
            start_x: 0.0,
            end_x: grid.gl_x,
            express: None,
        }
    }
}

pub(crate) struct SweepOutcome {
    pub plan: RoutePlan,
    /// Indices of boarded candidates.
    pub picked: Vec<usize>,
    /// Indices of ready candidates left behind for lack of room.
    pub spilled: Vec<usize>,
}

/// Readiness and capacity rules applied during a sweep.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Rules {
    pub capacity: usize,
    pub check_ready: bool,
}

struct Builder<'a> {
    grid: &'a GridGeometry,
    svc: &'a ServiceConfig,
    x: f64,
    iy: i64,
    /// Time the bus may leave its current position.
    t: f64,
    d_x: f64,
    d_y: f64,
    waypoints: Vec<Waypoint>,
    /// Current position is a pickup point already served, reached at this time.
    at_pickup: Option<f64>,
}

impl Builder<'_> {
    fn travel_time(&self, x: f64, iy: i64) -> f64 {
        ((iy - self.iy).abs() as f64 * self.grid.l_y + (x - self.x)) / self.svc.v_d
    }

    /// Arrival time at a point if it were visited next.
    fn arrival(&self, x: f64, iy: i64) -> f64 {
        match self.at_pickup {
            Some(t) if x == self.x && iy == self.iy => t,
            _ => self.t + self.travel_time(x, iy),
        }
    }

    /// Drives to `(x, iy)`: cross-street first, then along the street.
    fn drive(&mut self, x: f64, iy: i64, event: WaypointEvent) -> f64 {
        let dy = (iy - self.iy).abs() as f64 * self.grid.l_y;
        let dx = x - self.x;
        let y = iy as f64 * self.grid.l_y;
        if dy > 0.0 && dx > 0.0 {
            self.waypoints.push(Waypoint {
                x: self.x,
                y,
                time: self.t + dy / self.svc.v_d,
                event: WaypointEvent::Move,
            });
        }
        self.t += (dy + dx) / self.svc.v_d;
        self.d_x += dx;
        self.d_y += dy;
        self.x = x;
        self.iy = iy;
        self.waypoints.push(Waypoint {
            x,
            y,
            time: self.t,
            event,
        });
        self.t
    }

    /// Boards a passenger at `(x, iy)` and returns the pickup time.
    fn pick_up(&mut self, x: f64, iy: i64) -> f64 {
        if let Some(t) = self.at_pickup.filter(|_| x == self.x && iy == self.iy) {
            return t;
        }
        let arrival = self.drive(x, iy, WaypointEvent::Pickup);
        self.t += self.svc.t_s_prime;
        self.waypoints.push(Waypoint {
            x,
            y: iy as f64 * self.grid.l_y,
            time: self.t,
            event: WaypointEvent::Dwell,
        });
        self.at_pickup = Some(arrival);
        arrival
    }
}

/// Runs one bus over the candidates, boarding ready requests up to capacity.
///
/// `candidates` must be sorted by [`Candidate::sort_key`].
pub(crate) fn sweep(
    candidates: &[Candidate],
    leg: &Leg,
    departure: f64,
    grid: &GridGeometry,
    svc: &ServiceConfig,
    rules: Rules,
) -> SweepOutcome {
    let mut b = Builder {
        grid,
        svc,
        x: leg.start_x,
        iy: 0,
        t: departure,
        d_x: 0.0,
        d_y: 0.0,
        waypoints: vec![Waypoint {
            x: leg.start_x,
            y: 0.0,
            time: departure,
            event: WaypointEvent::Move,
        }],
        at_pickup: None,
    };
    let mut priority_left = candidates.iter().filter(|c| c.priority).count();
    let mut picked = Vec::new();
    let mut spilled = Vec::new();
    let mut pickups: Vec<Pickup> = Vec::new();

    let mut start = 0;
    while start < candidates.len() {
        let ix = candidates[start].point.ix;
        let end = start + candidates[start..].iter().take_while(|c| c.point.ix == ix).count();
        let x = (ix as f64 * grid.l_x).max(leg.start_x);

        // Direction of the sweep along this cross-street: start at whichever
        // plausible extreme is closer to the bus.
        let plausible = |c: &&Candidate| !rules.check_ready || c.request.t_k <= b.arrival(x, c.point.iy) + 1e-12;
        let lo = candidates[start..end].iter().find(plausible).map(|c| c.point.iy);
        let hi = candidates[start..end].iter().rev().find(plausible).map(|c| c.point.iy);
        let ascending = match (lo, hi) {
            (Some(lo), Some(hi)) => (b.iy - lo).abs() <= (b.iy - hi).abs(),
            _ => true,
        };
        let order: Vec<usize> = if ascending {
            (start..end).collect()
        } else {
            (start..end).rev().collect()
        };

        for i in order {
            let c = &candidates[i];
            let iy = c.point.iy;
            if rules.check_ready && c.request.t_k > b.arrival(x, iy) + 1e-12 {
                if c.priority {
                    priority_left -= 1;
                }
                continue;
            }
            let room = if c.priority {
                priority_left -= 1;
                picked.len() < rules.capacity
            } else {
                picked.len() + priority_left < rules.capacity
            };
            if !room {
                spilled.push(i);
                continue;
            }
            let time = b.pick_up(x, iy);
            picked.push(i);
            pickups.push(Pickup {
                request: c.request.id,
                t_k: c.request.t_k,
                time,
                x,
                y: iy as f64 * grid.l_y,
                remaining_stops: 0,
            });
        }
        start = end;
    }

    if b.iy != 0 {
        let x = b.x;
        b.drive(x, 0, WaypointEvent::Move);
    }
    if leg.end_x > b.x {
        b.drive(leg.end_x, 0, WaypointEvent::Move);
    }
    let street_end = b.t;
    let mut express_legs = Vec::new();
    if let Some(e) = leg.express.filter(|e| e.length > 0.0) {
        b.waypoints.push(Waypoint {
            x: leg.end_x + e.length,
            y: 0.0,
            time: street_end + e.length / e.speed,
            event: WaypointEvent::Express,
        });
        express_legs.push(e);
    }

    // Distinct pickup points still ahead of each passenger.
    let mut distinct_after = 0u32;
    for k in (0..pickups.len()).rev() {
        pickups[k].remaining_stops = distinct_after;
        let first_at_point = k == 0 || pickups[k - 1].time != pickups[k].time;
        if first_at_point {
            distinct_after += 1;
        }
    }

    SweepOutcome {
        plan: RoutePlan {
            departure,
            waypoints: b.waypoints,
            d_x: b.d_x,
            d_y: b.d_y,
            pickups,
            express_legs,
            street_end,
        },
        picked,
        spilled,
    }
}

/// Route of one minibus from `(0, 0)` to `(GL_x, 0)` serving every request.
///
/// Requests must already lie on street intersections and are all taken to
/// be waiting when the bus passes.
pub fn plan_amsod_route(
    requests: &[Request],
    departure: f64,
    grid: &GridGeometry,
    svc: &ServiceConfig,
) -> Result<RoutePlan, SimError> {
    let mut candidates = Vec::with_capacity(requests.len());
    for r in requests {
        if !on_lattice((r.x, r.y), grid) {
            return Err(SimError::OffLattice {
                request: r.id,
                x: r.x,
                y: r.y,
            });
        }
        candidates.push(Candidate {
            request: *r,
            point: snap_to_streets((r.x, r.y), grid),
            priority: false,
        });
    }
    candidates.sort_by_key(Candidate::sort_key);
    let rules = Rules {
        capacity: usize::MAX,
        check_ready: false,
    };
    Ok(sweep(&candidates, &Leg::full(grid), departure, grid, svc, rules).plan)
}

/// Costs of one minibus trip from its plan.
///
/// Wait runs from the request to the pickup; riding runs from the end of the
/// pickup dwell to the end of the route, including any express leg.
pub fn evaluate_amsod_trip(plan: &RoutePlan, cost: &CostParams, svc: &ServiceConfig) -> Result<TripCosts, SimError> {
    let end = plan.end_time();
    let mut per_passenger = Vec::with_capacity(plan.pickups.len());
    for p in &plan.pickups {
        let wait = p.time - p.t_k;
        if wait < -1e-9 {
            return Err(SimError::NegativeWait { request: p.request, wait });
        }
        per_passenger.push(PassengerTimes {
            request: p.request,
            t_k: p.t_k,
            wait: wait.max(0.0),
            ivtt: end - (p.time + svc.t_s_prime),
            access: 0.0,
        });
    }
    Ok(super::fixed::price(per_passenger, cost.gamma_o * plan.distance(), cost))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets;
    use approx::assert_abs_diff_eq;

    fn req(id: u32, x: f64, y: f64) -> Request {
        Request {
            id,
            x,
            y,
            t_k: 0.0,
            home_stop: 0,
        }
    }

    #[test]
    fn empty_route_runs_the_axis() {
        let s = presets::model1();
        let p = plan_amsod_route(&[], 0.0, &s.grid, &s.service).unwrap();
        assert_abs_diff_eq!(p.d_x, 10.0);
        assert_eq!(p.d_y, 0.0);
        assert_abs_diff_eq!(p.end_time(), 10.0 / 35.0);
    }

    #[test]
    fn single_detour_goes_out_and_back() {
        let s = presets::model1();
        let p = plan_amsod_route(&[req(0, 5.0, 0.2)], 0.0, &s.grid, &s.service).unwrap();
        assert_abs_diff_eq!(p.d_y, 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(p.d_x, 10.0, epsilon = 1e-12);
    }

    #[test]
    fn same_cross_street_pair_is_one_vertical_pass() {
        let s = presets::model1();
        let reqs = [req(0, 1.0, 0.3), req(1, 1.0, -0.2), req(2, 2.0, 0.0)];
        let p = plan_amsod_route(&reqs, 0.0, &s.grid, &s.service).unwrap();
        assert_abs_diff_eq!(p.d_y, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.d_x, 10.0, epsilon = 1e-12);
        for w in p.waypoints.windows(2) {
            assert!(w[1].x >= w[0].x);
        }
    }

    #[test]
    fn off_lattice_request_is_rejected() {
        let s = presets::model1();
        assert!(matches!(
            plan_amsod_route(&[req(9, 1.03, 0.2)], 0.0, &s.grid, &s.service),
            Err(SimError::OffLattice { request: 9, .. })
        ));
    }

    #[test]
    fn pickup_times_add_dwell_per_distinct_point() {
        let s = presets::model1();
        let reqs = [req(0, 2.0, 0.0), req(1, 2.0, 0.0), req(2, 4.0, 0.0)];
        let p = plan_amsod_route(&reqs, 0.0, &s.grid, &s.service).unwrap();
        let v = s.service.v_d;
        assert_abs_diff_eq!(p.pickups[0].time, 2.0 / v, epsilon = 1e-12);
        assert_abs_diff_eq!(p.pickups[1].time, 2.0 / v, epsilon = 1e-12);
        assert_abs_diff_eq!(p.pickups[2].time, 4.0 / v + s.service.t_s_prime, epsilon = 1e-12);
        assert_eq!(p.pickups[0].remaining_stops, 1);
        assert_eq!(p.pickups[2].remaining_stops, 0);
    }

    #[test]
    fn single_passenger_rides_without_dwell() {
        let s = presets::model1();
        let p = plan_amsod_route(&[req(0, 6.0, 0.0)], 0.0, &s.grid, &s.service).unwrap();
        let c = evaluate_amsod_trip(&p, &s.cost, &s.service).unwrap();
        assert_abs_diff_eq!(c.per_passenger[0].ivtt, 4.0 / s.service.v_d, epsilon = 1e-12);
        assert_eq!(c.c_a, 0.0);
        assert_abs_diff_eq!(c.c_o, 10.0, epsilon = 1e-12);
    }

    #[test]
    fn pickup_before_request_is_an_error() {
        let s = presets::model1();
        let mut r = req(3, 6.0, 0.0);
        r.t_k = 5.0;
        let p = plan_amsod_route(&[r], 0.0, &s.grid, &s.service).unwrap();
        assert!(matches!(
            evaluate_amsod_trip(&p, &s.cost, &s.service),
            Err(SimError::NegativeWait { request: 3, .. })
        ));
    }
}
