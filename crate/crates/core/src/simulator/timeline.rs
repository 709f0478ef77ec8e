//! Dispatch over the simulation horizon: one bus leaves the terminal every
//! headway, carries whoever is ready and fits, and leaves the rest to the
//! next bus, where they board ahead of newer requests.

use serde::{Deserialize, Serialize};

use super::demand::{replication_rng, sample_requests};
use super::fixed::{evaluate_fixed_trip, ready_at_stop, FixedSchedule};
use super::lattice::{max_ix, snap_to_streets, StreetPoint};
use super::partition::{band_of, partition_zonal};
use super::routing::{evaluate_amsod_trip, sweep, Candidate, Leg, Rules};
use super::SimError;
use crate::model::{PassengerTimes, Request, RoutePlan, Scenario, TripCosts};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Fixed,
    Amsod,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Fixed => "fixed",
            Mode::Amsod => "amsod",
        }
    }
}

/// One departure and what it carried.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripLog {
    pub trip: usize,
    pub mode: Mode,
    /// Band (parallel routes) or zone (zonal express) served; 0 otherwise.
    pub group: usize,
    pub departure: f64,
    pub plan: Option<RoutePlan>,
    pub costs: TripCosts,
    pub served: Vec<u32>,
    /// Ready requests left for the next bus because this one was full.
    pub spilled: Vec<u32>,
}

/// All departures of one mode over the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timeline {
    pub mode: Mode,
    pub trips: Vec<TripLog>,
    /// Requests still waiting when the last bus had left.
    pub unserved: Vec<u32>,
    pub n_requests: usize,
}

impl Timeline {
    /// Operator cost of every departure in the horizon.
    pub fn operator_cost(&self) -> f64 {
        self.trips.iter().map(|t| t.costs.c_o).sum()
    }

    /// Every carried passenger, in trip order.
    pub fn passengers(&self) -> impl Iterator<Item = &PassengerTimes> {
        self.trips.iter().flat_map(|t| t.costs.per_passenger.iter())
    }
}

/// Samples replication 0 of `seed` and dispatches it in `mode`.
pub fn run_timeline(scenario: &Scenario, mode: Mode, seed: u64) -> Result<Timeline, SimError> {
    scenario.validate()?;
    let requests = sample_requests(&scenario.grid, &scenario.service, &mut replication_rng(seed, 0));
    simulate(scenario, mode, &requests)
}

/// Dispatches a given request realization in `mode`.
pub fn simulate(scenario: &Scenario, mode: Mode, requests: &[Request]) -> Result<Timeline, SimError> {
    match mode {
        Mode::Fixed => simulate_fixed(scenario, requests),
        Mode::Amsod => simulate_amsod(scenario, requests),
    }
}

struct Waiting {
    request: Request,
    stop: usize,
    ready: f64,
    priority: bool,
}

fn queue_order(a: &Waiting, b: &Waiting) -> std::cmp::Ordering {
    b.priority
        .cmp(&a.priority)
        .then(a.ready.total_cmp(&b.ready))
        .then(a.request.id.cmp(&b.request.id))
}

fn simulate_fixed(scenario: &Scenario, requests: &[Request]) -> Result<Timeline, SimError> {
    let (cost, grid, svc) = (&scenario.cost, &scenario.grid, &scenario.service);
    let sched = FixedSchedule::new(grid, svc);
    let capacity = svc.fixed_capacity() as usize;
    let mut queues: Vec<Vec<Waiting>> = (0..grid.n_stops()).map(|_| Vec::new()).collect();
    for r in requests {
        let (stop, ready) = ready_at_stop(r, grid, svc);
        queues[stop].push(Waiting {
            request: *r,
            stop,
            ready,
            priority: false,
        });
    }
    for q in &mut queues {
        q.sort_by(queue_order);
    }

    let mut trips = Vec::with_capacity(sched.departures.len());
    for (j, &departure) in sched.departures.iter().enumerate() {
        let mut priority_left: usize = queues.iter().map(|q| q.iter().filter(|w| w.priority).count()).sum();
        let mut boardings = Vec::new();
        let mut spilled = Vec::new();
        for (s, queue) in queues.iter_mut().enumerate() {
            let t_b = sched.stop_arrival(s, departure);
            let mut keep = Vec::with_capacity(queue.len());
            for mut w in queue.drain(..) {
                if w.ready > t_b + 1e-12 {
                    if w.priority {
                        priority_left -= 1;
                    }
                    keep.push(w);
                    continue;
                }
                let room = if w.priority {
                    priority_left -= 1;
                    boardings.len() < capacity
                } else {
                    boardings.len() + priority_left < capacity
                };
                if room {
                    boardings.push((w.request, w.stop));
                } else {
                    w.priority = true;
                    spilled.push(w.request.id);
                    keep.push(w);
                }
            }
            keep.sort_by(queue_order);
            *queue = keep;
        }
        let costs = evaluate_fixed_trip(&boardings, departure, &sched, cost, grid, svc)?;
        trips.push(TripLog {
            trip: j,
            mode: Mode::Fixed,
            group: 0,
            departure,
            plan: None,
            costs,
            served: boardings.iter().map(|(r, _)| r.id).collect(),
            spilled,
        });
    }
    let mut unserved: Vec<u32> = queues.iter().flatten().map(|w| w.request.id).collect();
    unserved.sort_unstable();
    Ok(Timeline {
        mode: Mode::Fixed,
        trips,
        unserved,
        n_requests: requests.len(),
    })
}

/// Street extent of each route group and the lattice columns it may use.
struct Group {
    leg: Leg,
    ix_range: (i64, i64),
    pending: Vec<Candidate>,
}

fn simulate_amsod(scenario: &Scenario, requests: &[Request]) -> Result<Timeline, SimError> {
    let (cost, grid, svc) = (&scenario.cost, &scenario.grid, &scenario.service);
    let full = (0, max_ix(grid));
    let n_p = svc.n_parallel.max(1) as usize;
    let n_z = svc.n_zones.max(1) as usize;

    let mut groups: Vec<Group> = if n_p > 1 {
        (0..n_p)
            .map(|_| Group {
                leg: Leg::full(grid),
                ix_range: full,
                pending: Vec::new(),
            })
            .collect()
    } else {
        partition_zonal(&[], grid, svc, n_z)?
            .into_iter()
            .map(|z| Group {
                leg: Leg {
                    start_x: z.x_lo,
                    end_x: z.x_hi,
                    express: z.express,
                },
                ix_range: (
                    ((z.x_lo / grid.l_x) - 1e-9).ceil() as i64,
                    ((z.x_hi / grid.l_x) + 1e-9).floor() as i64,
                ),
                pending: Vec::new(),
            })
            .collect()
    };

    let g_max = grid.gl_y.max();
    for r in requests {
        let g = if n_p > 1 {
            band_of(r.y, g_max, n_p)
        } else {
            super::partition::zone_of(r.x, grid.gl_x, n_z)
        };
        let group = &mut groups[g];
        let p = snap_to_streets((r.x, r.y), grid);
        let point = StreetPoint {
            ix: p.ix.clamp(group.ix_range.0, group.ix_range.1.max(group.ix_range.0)),
            iy: p.iy,
        };
        group.pending.push(Candidate {
            request: *r,
            point,
            priority: false,
        });
    }
    for g in &mut groups {
        g.pending.sort_by_key(Candidate::sort_key);
    }

    let rules = Rules {
        capacity: svc.capacity as usize,
        check_ready: true,
    };
    let n_groups = groups.len();
    let mut trips = Vec::with_capacity(svc.departures());
    for j in 0..svc.departures() {
        let departure = j as f64 * svc.headway;
        let gi = j % n_groups;
        let group = &mut groups[gi];
        let out = sweep(&group.pending, &group.leg, departure, grid, svc, rules);
        let costs = evaluate_amsod_trip(&out.plan, cost, svc)?;
        let served: Vec<u32> = out.picked.iter().map(|&i| group.pending[i].request.id).collect();
        let spilled: Vec<u32> = out.spilled.iter().map(|&i| group.pending[i].request.id).collect();
        for &i in &out.spilled {
            group.pending[i].priority = true;
        }
        let mut taken = vec![false; group.pending.len()];
        for &i in &out.picked {
            taken[i] = true;
        }
        let mut k = 0;
        group.pending.retain(|_| {
            k += 1;
            !taken[k - 1]
        });
        trips.push(TripLog {
            trip: j,
            mode: Mode::Amsod,
            group: gi,
            departure,
            plan: Some(out.plan),
            costs,
            served,
            spilled,
        });
    }
    let mut unserved: Vec<u32> = groups.iter().flat_map(|g| g.pending.iter().map(|c| c.request.id)).collect();
    unserved.sort_unstable();
    Ok(Timeline {
        mode: Mode::Amsod,
        trips,
        unserved,
        n_requests: requests.len(),
    })
}
