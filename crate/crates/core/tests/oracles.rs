//! Reference values checked against independent oracles: sampling moments,
//! hand-derived quantities and the bundled scenario files.

use std::path::PathBuf;

use approx::assert_abs_diff_eq;
use rand::Rng;
use rand_distr::StandardNormal;

use minibus::analytic::{mean_abs_diff, Dispersion};
use minibus::experiments::{percentile_sorted, DEFAULT_SEED};
use minibus::model::{load_scenario, presets, Scenario};
use minibus::simulator::{partition_parallel, replication_rng, run_timeline, sample_requests, Mode};

fn bundled(name: &str) -> Scenario {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.json"));
    let (s, warnings) = load_scenario(&path).unwrap();
    assert!(warnings.is_empty(), "{name}: {warnings:?}");
    s
}

// The reference value 2/sqrt(pi) is written out as a literal oracle.
#[allow(clippy::approx_constant)]
#[test]
fn normal_mean_abs_diff_matches_sampled_pairs() {
    let mut rng = replication_rng(DEFAULT_SEED, 1);
    let n = 1_000_000;
    let sampled: f64 = (0..n)
        .map(|_| {
            let (a, b): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
            (a - b).abs()
        })
        .sum::<f64>()
        / n as f64;
    let exact = mean_abs_diff(&Dispersion::Normal { sigma: 1.0 }).unwrap();
    assert_abs_diff_eq!(exact, 1.12838, epsilon = 1e-5);
    assert_abs_diff_eq!(sampled, exact, epsilon = 0.01);
}

#[test]
fn request_counts_have_poisson_moments() {
    let s = presets::model1();
    let counts: Vec<f64> = (0..1000u64)
        .map(|seed| sample_requests(&s.grid, &s.service, &mut replication_rng(seed, 0)).len() as f64)
        .collect();
    let mean = counts.iter().sum::<f64>() / counts.len() as f64;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (counts.len() - 1) as f64;
    assert_abs_diff_eq!(mean, 180.0, epsilon = 1.0);
    assert_abs_diff_eq!(var, 180.0, epsilon = 10.0);
}

#[test]
fn symmetric_demand_fills_two_bands_evenly() {
    let s = presets::model2();
    let (mut lower, mut total) = (0usize, 0usize);
    for seed in 0..1000u64 {
        let requests = sample_requests(&s.grid, &s.service, &mut replication_rng(seed, 0));
        let bands = partition_parallel(&requests, &s.grid, 2);
        lower += bands[0].requests.len();
        total += requests.len();
    }
    let sd = (total as f64 * 0.25).sqrt();
    assert!((lower as f64 - total as f64 / 2.0).abs() < 3.0 * sd, "{lower} of {total}");
}

#[test]
fn normal_lower_percentile() {
    let mut rng = replication_rng(DEFAULT_SEED, 2);
    let mut v: Vec<f64> = (0..10_000).map(|_| rng.sample(StandardNormal)).collect();
    v.sort_by(f64::total_cmp);
    assert_abs_diff_eq!(percentile_sorted(&v, 0.025), -1.96, epsilon = 0.08);
}

#[test]
fn bundled_model_files_are_the_presets() {
    assert_eq!(bundled("model1"), presets::model1());
    assert_eq!(bundled("model2"), presets::model2());
}

#[test]
fn bundled_case_files_carry_the_case_configuration() {
    let c126 = bundled("cta126");
    assert_abs_diff_eq!(c126.grid.gl_x, 10.9, epsilon = 1e-9);
    assert_eq!(c126.service.lambda, 80.0);
    assert_eq!(c126.service.v_d, 30.0);
    assert_abs_diff_eq!(c126.service.t_s * 60.0, 0.33, epsilon = 1e-12);
    assert_abs_diff_eq!(c126.grid.gl_y.max(), 0.2, epsilon = 1e-12);

    let c84 = bundled("cta84");
    assert_abs_diff_eq!(c84.grid.gl_x, 8.0, epsilon = 1e-9);
    assert_eq!(c84.service.lambda, 50.0);
    assert_abs_diff_eq!(c84.service.headway, 1.0 / 3.0, epsilon = 1e-12);
    assert_abs_diff_eq!(c84.grid.gl_y.max(), 0.8, epsilon = 1e-12);
    assert_abs_diff_eq!(c84.md(), 0.5333, epsilon = 1e-4);
}

#[test]
fn fixed_operator_cost_is_departures_times_route_length() {
    let c84 = bundled("cta84");
    let t = run_timeline(&c84, Mode::Fixed, DEFAULT_SEED).unwrap();
    assert_eq!(t.trips.len(), 9);
    assert_abs_diff_eq!(t.operator_cost(), 72.0, epsilon = 1e-9);

    let c126 = bundled("cta126");
    let t = run_timeline(&c126, Mode::Fixed, DEFAULT_SEED).unwrap();
    assert_abs_diff_eq!(t.operator_cost(), 12.0 * 10.9, epsilon = 1e-9);
}
