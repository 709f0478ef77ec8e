use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp;

use crate::model::{GridGeometry, Request, ServiceConfig};

/// Independent random stream for one replication.
///
/// Streams are addressed by `(seed, replication)`, so results do not depend
/// on which worker runs which replication or in what order.
pub fn replication_rng(seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication);
    rng
}

/// Draws a demand position around a stop chosen by weight.
///
/// `x` is uniform within half a stop spacing of the stop and `y` uniform
/// across the catchment, redrawn until the rectilinear distance to the stop
/// fits inside the catchment half-width.
fn sample_position<R: Rng + ?Sized>(
    grid: &GridGeometry,
    stops: &WeightedIndex<f64>,
    rng: &mut R,
) -> (f64, f64, usize) {
    let stop = stops.sample(rng);
    let half = grid.d_xs / 2.0;
    let g = grid.gl_y_at(stop);
    loop {
        let dx = rng.random_range(-half..=half);
        let y = rng.random_range(-g..=g);
        if dx.abs() + y.abs() <= g {
            return (grid.stop_chainages[stop] + dx, y, stop);
        }
    }
}

fn stop_distribution(grid: &GridGeometry) -> WeightedIndex<f64> {
    WeightedIndex::new(grid.stop_weights.iter().copied()).expect("validated stop weights")
}

/// Poisson request stream of rate `lambda` over `[0, horizon]`.
pub fn sample_requests<R: Rng + ?Sized>(grid: &GridGeometry, svc: &ServiceConfig, rng: &mut R) -> Vec<Request> {
    if svc.lambda <= 0.0 {
        return Vec::new();
    }
    let gaps = Exp::new(svc.lambda).expect("positive rate");
    let stops = stop_distribution(grid);
    let mut out = Vec::with_capacity((svc.lambda * svc.horizon * 1.2) as usize + 8);
    let mut t = 0.0;
    loop {
        t += gaps.sample(rng);
        if t > svc.horizon {
            break;
        }
        let (x, y, home_stop) = sample_position(grid, &stops, rng);
        out.push(Request {
            id: out.len() as u32,
            x,
            y,
            t_k: t,
            home_stop,
        });
    }
    out
}

/// Requests for replication 0 of `seed`.
pub fn sample_requests_seeded(grid: &GridGeometry, svc: &ServiceConfig, seed: u64) -> Vec<Request> {
    sample_requests(grid, svc, &mut replication_rng(seed, 0))
}

/// Walk time from a demand point to the nearest stop (h).
pub fn access_time(grid: &GridGeometry, svc: &ServiceConfig, x: f64, y: f64) -> (usize, f64) {
    let stop = grid.nearest_stop(x);
    let dist = (x - grid.stop_chainages[stop]).abs() + y.abs();
    (stop, dist / svc.v_w)
}

/// Sampling estimate of the mean access time over the demand distribution (h).
pub fn mean_access_time(grid: &GridGeometry, svc: &ServiceConfig, samples: usize, seed: u64) -> f64 {
    let stops = stop_distribution(grid);
    let mut rng = replication_rng(seed, u64::MAX);
    let total: f64 = (0..samples)
        .map(|_| {
            let (x, y, _) = sample_position(grid, &stops, &mut rng);
            access_time(grid, svc, x, y).1
        })
        .sum();
    total / samples as f64
}

/// Sample of demand offsets `y` (km), e.g. for an empirical MD(Y).
pub fn sample_offsets(grid: &GridGeometry, samples: usize, seed: u64) -> Vec<f64> {
    let stops = stop_distribution(grid);
    let mut rng = replication_rng(seed, u64::MAX - 1);
    (0..samples).map(|_| sample_position(grid, &stops, &mut rng).1).collect()
}
