use std::io::Write;

use serde::Serialize;

use super::fixed::FixedSchedule;
use super::timeline::Timeline;
use crate::model::{Scenario, WaypointEvent};

#[derive(Serialize)]
struct TraceRow {
    trip: usize,
    time_h: f64,
    x_km: f64,
    y_km: f64,
    event: WaypointEvent,
}

/// Writes one CSV row per waypoint of every trip, for trip diagrams.
///
/// Fixed-route trips are traced as a dwell at each stop followed by the run
/// to the end of the route.
pub fn write_trace<W: Write>(scenario: &Scenario, timeline: &Timeline, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let sched = FixedSchedule::new(&scenario.grid, &scenario.service);
    for trip in &timeline.trips {
        let row = |time_h, x_km, y_km, event| TraceRow {
            trip: trip.trip,
            time_h,
            x_km,
            y_km,
            event,
        };
        match &trip.plan {
            Some(plan) => {
                for p in &plan.waypoints {
                    w.serialize(row(p.time, p.x, p.y, p.event))?;
                }
            }
            None => {
                w.serialize(row(trip.departure, 0.0, 0.0, WaypointEvent::Move))?;
                for (s, &x) in scenario.grid.stop_chainages.iter().enumerate() {
                    let t = sched.stop_arrival(s, trip.departure);
                    w.serialize(row(t, x, 0.0, WaypointEvent::Dwell))?;
                }
                let end = sched.end_time(trip.departure);
                w.serialize(row(end, scenario.grid.gl_x, 0.0, WaypointEvent::Move))?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
