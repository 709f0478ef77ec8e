//! Stochastic simulation of both services on the street grid.
//!
//! Demand is a Poisson stream of requests scattered around the stops. The
//! fixed route picks passengers up at stops on a timetable; the minibus picks
//! them up at the nearest street intersection, routed by simple sweep rules.
//! [`run_timeline`] dispatches one bus per headway over the horizon.

mod demand;
mod fixed;
mod lattice;
mod partition;
mod routing;
mod timeline;
mod trace;

use thiserror::Error;

use crate::model::ValidationErrors;

pub use demand::{
    access_time, mean_access_time, replication_rng, sample_offsets, sample_requests, sample_requests_seeded,
};
pub use fixed::{evaluate_fixed_trip, FixedSchedule};
pub use lattice::{on_lattice, snap_to_streets, StreetPoint};
pub use partition::{band_of, partition_parallel, partition_zonal, zone_of, Band, Zone};
pub use routing::{evaluate_amsod_trip, plan_amsod_route};
pub use timeline::{run_timeline, simulate, Mode, Timeline, TripLog};
pub use trace::write_trace;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("request {request} is picked up {wait} h before it is made")]
    NegativeWait { request: u32, wait: f64 },
    #[error("request {request} at ({x}, {y}) is not on a street intersection")]
    OffLattice { request: u32, x: f64, y: f64 },
    #[error("zonal express needs a highway speed")]
    MissingHighwaySpeed,
    #[error(transparent)]
    Invalid(#[from] ValidationErrors),
}
