//! Closed-form evaluation of the generalized-cost model.
//!
//! All functions are pure. Route-length terms use the suburb length
//! `gl_x`; times are hours, costs are dollars per hour unless stated.

mod zonal;

pub use zonal::{zonal_plan, zonal_tc, ZonalPlan};

use serde::{Deserialize, Serialize};

use crate::model::{CostParams, GridGeometry, ServiceConfig};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalyticError {
    #[error("invalid dispersion: {0}")]
    InvalidDispersion(&'static str),
    #[error("headway must be positive, got {0}")]
    NonPositiveHeadway(f64),
    #[error("headway variance must be non-negative, got {0}")]
    NegativeVariance(f64),
    #[error("mean access time must be positive")]
    ZeroMeanAccess,
    #[error("zonal plan needs a highway speed when more than one zone is considered")]
    MissingHighwaySpeed,
    #[error("n_max must be at least 1")]
    NoZones,
}

/// Distribution of demand offsets from the route axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Dispersion {
    Uniform { a: f64, b: f64 },
    Normal { sigma: f64 },
    /// Observed offsets (km).
    Empirical(Vec<f64>),
}

/// Mean absolute difference MD(Y) = E|Y_i - Y_j| for i.i.d. draws (km).
pub fn mean_abs_diff(d: &Dispersion) -> Result<f64, AnalyticError> {
    match d {
        Dispersion::Uniform { a, b } => {
            if !(a < b) {
                return Err(AnalyticError::InvalidDispersion("uniform needs a < b"));
            }
            Ok((b - a) / 3.0)
        }
        Dispersion::Normal { sigma } => {
            if !(*sigma > 0.0) {
                return Err(AnalyticError::InvalidDispersion("normal needs sigma > 0"));
            }
            Ok(2.0 * sigma / std::f64::consts::PI.sqrt())
        }
        Dispersion::Empirical(samples) => {
            if samples.len() < 2 {
                return Err(AnalyticError::InvalidDispersion(
                    "empirical needs at least two samples",
                ));
            }
            let mut sorted = samples.clone();
            sorted.sort_by(f64::total_cmp);
            let n = sorted.len() as f64;
            // sum over i < j of (y_j - y_i), each element weighted by its rank
            let pair_sum: f64 = sorted
                .iter()
                .enumerate()
                .map(|(i, y)| y * (2.0 * i as f64 - n + 1.0))
                .sum();
            Ok(2.0 * pair_sum / (n * (n - 1.0)))
        }
    }
}

/// Expected wait for random arrivals: `H/2 + var/(2H)`.
pub fn expected_wait(headway: f64, headway_variance: f64) -> Result<f64, AnalyticError> {
    if !(headway > 0.0) {
        return Err(AnalyticError::NonPositiveHeadway(headway));
    }
    if !(headway_variance >= 0.0) {
        return Err(AnalyticError::NegativeVariance(headway_variance));
    }
    Ok(headway / 2.0 + headway_variance / (2.0 * headway))
}

/// Expected fixed-route IVTT: ride from the mid-point plus half the dwells.
pub fn expected_ivtt_fixed(route_length: f64, v_d: f64, t_s: f64, n_stops: usize) -> f64 {
    route_length / (2.0 * v_d) + t_s * n_stops as f64 / 2.0
}

/// Expected semi-on-demand IVTT with `k_j` passengers on the trip.
pub fn expected_ivtt_amsod(route_length: f64, v_d: f64, t_s_prime: f64, k_j: f64, md: f64) -> f64 {
    route_length / (2.0 * v_d) + k_j * md / (2.0 * v_d) + t_s_prime * k_j / 2.0
}

/// Arrival-time variance induced by the y-detours and pickup dwells (h²).
pub fn amsod_headway_variance(k_j: f64, md: f64, v_d: f64, t_s_prime: f64) -> f64 {
    let spread = md / v_d;
    spread * spread * (k_j * k_j + 6.0 * k_j + 2.0) / 12.0 + k_j / 2.0 * t_s_prime * t_s_prime
}

/// Hourly generalized cost split by component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostSummary {
    pub access: f64,
    pub wait: f64,
    pub ride: f64,
    pub operator: f64,
    pub total: f64,
    /// Per-passenger expected wait (h).
    pub expected_wait: f64,
    /// Per-passenger expected IVTT (h).
    pub expected_ivtt: f64,
}

impl CostSummary {
    fn new(access: f64, wait: f64, ride: f64, operator: f64, expected_wait: f64, expected_ivtt: f64) -> Self {
        Self {
            access,
            wait,
            ride,
            operator,
            total: access + wait + ride + operator,
            expected_wait,
            expected_ivtt,
        }
    }
}

/// Hourly cost of the existing fixed route.
pub fn hourly_cost_fixed(
    cost: &CostParams,
    grid: &GridGeometry,
    svc: &ServiceConfig,
    mean_access: f64,
    headway_variance: f64,
) -> CostSummary {
    let lam = cost.vot * svc.lambda;
    let wait_h = svc.headway / 2.0 + headway_variance / (2.0 * svc.headway);
    let ivtt_h = expected_ivtt_fixed(grid.gl_x, svc.v_d, svc.t_s, grid.n_stops());
    CostSummary::new(
        cost.gamma_a * lam * mean_access,
        cost.gamma_w * lam * wait_h,
        cost.gamma_r * lam * ivtt_h,
        cost.gamma_o * grid.gl_x / svc.headway,
        wait_h,
        ivtt_h,
    )
}

/// Hourly cost of a single semi-on-demand route.
pub fn hourly_cost_amsod(
    cost: &CostParams,
    grid: &GridGeometry,
    svc: &ServiceConfig,
    md: f64,
) -> CostSummary {
    let h = svc.headway;
    let k = svc.lambda * h;
    let variance = amsod_headway_variance(k, md, svc.v_d, svc.t_s_prime);
    let wait_h = h / 2.0 + variance / (2.0 * h);
    let ivtt_h = grid.gl_x / (2.0 * svc.v_d) + k * md / (2.0 * svc.v_d) + svc.t_s_prime * k / 2.0;
    let lam = cost.vot * svc.lambda;
    CostSummary::new(
        0.0,
        cost.gamma_w * lam * wait_h,
        cost.gamma_r * lam * ivtt_h,
        cost.gamma_o * (grid.gl_x / h + svc.lambda * md),
        wait_h,
        ivtt_h,
    )
}

/// Numerator terms of the selection indicator, per passenger (h).
///
/// Parallel routes: each band bus runs at `n_p` times the headway over
/// `1/n_p` of the dispersion, which leaves the ride and variance terms
/// as for one route and divides the operator detour term by `n_p`.
fn added_cost_per_passenger(cost: &CostParams, svc: &ServiceConfig, md: f64, n_p: u32) -> f64 {
    let h = svc.headway;
    let k = svc.lambda * h;
    let spread = md / svc.v_d;
    let ride = cost.gamma_r * k * md / (2.0 * svc.v_d);
    let variance = cost.gamma_w / (2.0 * h) * (spread * spread * (k * k + 6.0 * k + 2.0) / 12.0);
    let dwell = cost.gamma_w * svc.lambda / 4.0 * svc.t_s_prime * svc.t_s_prime;
    let operator = cost.gamma_o / cost.vot * (md / n_p as f64);
    ride + variance + dwell + operator
}

/// Hourly cost difference, semi-on-demand minus fixed; negative favors conversion.
pub fn delta_tc_hourly(
    cost: &CostParams,
    _grid: &GridGeometry,
    svc: &ServiceConfig,
    md: f64,
    mean_access: f64,
) -> f64 {
    let h = svc.headway;
    let k = svc.lambda * h;
    let spread = md / svc.v_d;
    let variance = spread * spread * (k * k + 6.0 * k + 2.0) / 12.0 + k / 2.0 * svc.t_s_prime * svc.t_s_prime;
    cost.vot / h
        * (-cost.gamma_a * k * mean_access
            + cost.gamma_w * svc.lambda / 2.0 * variance
            + cost.gamma_r * k * k * md / (2.0 * svc.v_d))
        + cost.gamma_o * svc.lambda * md
}

/// Added wait, ride and operator cost per unit of access-cost saving.
/// Below 1 the route is a conversion candidate.
pub fn selection_indicator(
    cost: &CostParams,
    svc: &ServiceConfig,
    md: f64,
    mean_access: f64,
) -> Result<f64, AnalyticError> {
    indicator(cost, svc, md, mean_access, 1)
}

fn indicator(
    cost: &CostParams,
    svc: &ServiceConfig,
    md: f64,
    mean_access: f64,
    n_p: u32,
) -> Result<f64, AnalyticError> {
    if !(mean_access > 0.0) {
        return Err(AnalyticError::ZeroMeanAccess);
    }
    Ok(added_cost_per_passenger(cost, svc, md, n_p) / (cost.gamma_a * mean_access))
}

/// Largest favorable demand rate from the ride/operator trade-off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DemandBound {
    /// Passengers per hour; zero when no demand level is favorable.
    Bounded(f64),
    /// No dispersion, so detours never eat the access saving.
    Unbounded,
}

impl DemandBound {
    pub fn value(self) -> Option<f64> {
        match self {
            DemandBound::Bounded(v) => Some(v),
            DemandBound::Unbounded => None,
        }
    }
}

/// Demand bound ignoring the random part of the wait.
pub fn demand_upper_bound(cost: &CostParams, svc: &ServiceConfig, md: f64, mean_access: f64) -> DemandBound {
    bound(cost, svc, md, mean_access, 1)
}

fn bound(cost: &CostParams, svc: &ServiceConfig, md: f64, mean_access: f64, n_p: u32) -> DemandBound {
    if !(md > 0.0) {
        return DemandBound::Unbounded;
    }
    let saving = 2.0 * cost.gamma_a * mean_access * svc.v_d / (cost.gamma_r * md);
    let operator = 2.0 * cost.gamma_o * svc.v_d / (cost.gamma_r * cost.vot * n_p as f64);
    DemandBound::Bounded(((saving - operator) / svc.headway).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParallelMetrics {
    pub n_p: u32,
    pub selection_indicator: f64,
    pub demand_bound: DemandBound,
}

/// Selection indicator and demand bound for `n_p` parallel semi-on-demand routes.
pub fn parallel_metrics(
    cost: &CostParams,
    svc: &ServiceConfig,
    md: f64,
    mean_access: f64,
    n_p: u32,
) -> Result<ParallelMetrics, AnalyticError> {
    let n_p = n_p.max(1);
    Ok(ParallelMetrics {
        n_p,
        selection_indicator: indicator(cost, svc, md, mean_access, n_p)?,
        demand_bound: bound(cost, svc, md, mean_access, n_p),
    })
}

/// Mean access time used for screening: half the maximum access time,
/// i.e. access distance spread evenly up to the walk reach.
pub fn screening_mean_access(svc: &ServiceConfig) -> f64 {
    svc.s_o / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets;
    use approx::assert_abs_diff_eq;

    const MIN: f64 = 1.0 / 60.0;

    #[test]
    #[allow(clippy::approx_constant)]
    fn uniform_and_normal_dispersion() {
        let md = mean_abs_diff(&Dispersion::Uniform { a: -0.5333, b: 0.5333 }).unwrap();
        assert_abs_diff_eq!(md, 0.3555, epsilon = 1e-3);
        assert_eq!(mean_abs_diff(&Dispersion::Uniform { a: 0.0, b: 3.0 }).unwrap(), 1.0);
        let n = mean_abs_diff(&Dispersion::Normal { sigma: 1.0 }).unwrap();
        assert_abs_diff_eq!(n, 1.128_379, epsilon = 1e-6);
    }

    #[test]
    fn empirical_dispersion_matches_pairwise_definition() {
        let ys: [f64; 5] = [0.3, -0.1, 0.0, 0.25, -0.4];
        let mut total = 0.0;
        for (i, a) in ys.iter().enumerate() {
            for (j, b) in ys.iter().enumerate() {
                if i != j {
                    total += (a - b).abs();
                }
            }
        }
        let expected = total / (ys.len() * (ys.len() - 1)) as f64;
        let got = mean_abs_diff(&Dispersion::Empirical(ys.to_vec())).unwrap();
        assert_abs_diff_eq!(got, expected, epsilon = 1e-12);
    }

    #[test]
    fn invalid_dispersions() {
        assert!(mean_abs_diff(&Dispersion::Uniform { a: 1.0, b: 1.0 }).is_err());
        assert!(mean_abs_diff(&Dispersion::Normal { sigma: 0.0 }).is_err());
        assert!(mean_abs_diff(&Dispersion::Empirical(vec![1.0])).is_err());
    }

    #[test]
    fn expected_wait_examples() {
        assert_abs_diff_eq!(expected_wait(0.25, 0.0).unwrap() / MIN, 7.5, epsilon = 1e-12);
        assert_abs_diff_eq!(expected_wait(1.0 / 3.0, 0.0).unwrap() / MIN, 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(expected_wait(0.25, 0.0025).unwrap(), 0.13, epsilon = 1e-12);
        assert!(expected_wait(0.0, 0.0).is_err());
        assert!(expected_wait(0.25, -1.0).is_err());
    }

    #[test]
    fn expected_ivtt_examples() {
        assert_abs_diff_eq!(expected_ivtt_fixed(10.0, 35.0, 0.4 * MIN, 25) / MIN, 13.571, epsilon = 1e-3);
        assert_abs_diff_eq!(expected_ivtt_fixed(10.0, 35.0, 0.0, 25) / MIN, 8.571, epsilon = 1e-3);
        assert_eq!(expected_ivtt_fixed(0.0, 35.0, 0.4 * MIN, 0), 0.0);

        let amsod = expected_ivtt_amsod(10.0, 35.0, 0.4 * MIN, 15.0, 0.3556) / MIN;
        assert_abs_diff_eq!(amsod, 16.1, epsilon = 0.05);
        assert_abs_diff_eq!(expected_ivtt_amsod(10.0, 35.0, 0.4 * MIN, 0.0, 0.3556) / MIN, 8.571, epsilon = 1e-3);
        assert_abs_diff_eq!(expected_ivtt_amsod(10.0, 35.0, 0.0, 15.0, 0.0) / MIN, 8.571, epsilon = 1e-3);
    }

    #[test]
    fn headway_variance_examples() {
        let v = amsod_headway_variance(15.0, 0.3556, 35.0, 0.4 * MIN);
        assert_abs_diff_eq!(v, 3.060e-3, epsilon = 5e-6);
        assert_eq!(amsod_headway_variance(0.0, 0.0, 35.0, 0.0), 0.0);
        let mut last = -1.0;
        for k in 0..40 {
            let v = amsod_headway_variance(k as f64, 0.3, 35.0, 0.0);
            assert!(v > last);
            last = v;
        }
    }

    #[test]
    fn fixed_route_hourly_terms() {
        let s = presets::model1();
        let c = hourly_cost_fixed(&s.cost, &s.grid, &s.service, 4.79 * MIN, 0.0);
        assert_abs_diff_eq!(c.access, 158.0, epsilon = 1.0);
        assert_abs_diff_eq!(c.wait, 185.6, epsilon = 0.5);
        assert_abs_diff_eq!(c.ride, 224.0, epsilon = 1.0);
        assert_abs_diff_eq!(c.operator, 40.0, epsilon = 1e-12);
        assert_eq!(c.total, c.access + c.wait + c.ride + c.operator);

        let mut idle = s.service.clone();
        idle.lambda = 0.0;
        let c = hourly_cost_fixed(&s.cost, &s.grid, &idle, 4.79 * MIN, 0.0);
        assert_eq!((c.access, c.wait, c.ride), (0.0, 0.0, 0.0));
        assert_eq!(c.operator, 40.0);
    }

    #[test]
    fn amsod_hourly_terms() {
        let s = presets::model1();
        let c = hourly_cost_amsod(&s.cost, &s.grid, &s.service, 0.3556);
        assert_eq!(c.access, 0.0);
        assert_abs_diff_eq!(c.ride, 266.0, epsilon = 1.0);
        assert_abs_diff_eq!(c.operator, 40.0 + 60.0 * 0.3556, epsilon = 1e-9);

        // without detours and with the dwell spread like the fixed route's,
        // the ride term is the fixed-route ride term
        let mut svc = s.service.clone();
        svc.t_s_prime = svc.t_s * s.grid.n_stops() as f64 / (svc.lambda * svc.headway);
        let a = hourly_cost_amsod(&s.cost, &s.grid, &svc, 0.0);
        let f = hourly_cost_fixed(&s.cost, &s.grid, &svc, 0.0, 0.0);
        assert_abs_diff_eq!(a.ride, f.ride, epsilon = 1e-9);
    }

    #[test]
    fn delta_tc_examples() {
        let s = presets::model1();
        let md = 2.0 * 0.5333 / 3.0;
        assert!(delta_tc_hourly(&s.cost, &s.grid, &s.service, md, 4.79 * MIN) < 0.0);

        let mut idle = s.service.clone();
        idle.lambda = 0.0;
        assert_eq!(delta_tc_hourly(&s.cost, &s.grid, &idle, md, 4.79 * MIN), 0.0);

        let mut flat = s.service.clone();
        flat.t_s_prime = 0.0;
        let d = delta_tc_hourly(&s.cost, &s.grid, &flat, 0.0, 4.79 * MIN);
        let pure_access = -s.cost.gamma_a * s.cost.vot * flat.lambda * 4.79 * MIN;
        assert_abs_diff_eq!(d, pure_access, epsilon = 1e-9);
    }

    #[test]
    fn zero_access_has_no_indicator() {
        let s = presets::model1();
        assert_eq!(
            selection_indicator(&s.cost, &s.service, 0.3, 0.0),
            Err(AnalyticError::ZeroMeanAccess)
        );
    }

    #[test]
    fn no_dispersion_means_no_bound() {
        let s = presets::model1();
        assert_eq!(demand_upper_bound(&s.cost, &s.service, 0.0, 0.05), DemandBound::Unbounded);
    }

    #[test]
    fn doubling_access_penalty_doubles_the_saving_term() {
        let s = presets::model1();
        let md = 0.3556;
        let operator_term = 2.0 * s.cost.gamma_o * s.service.v_d / (s.cost.gamma_r * s.cost.vot) / s.service.headway;
        let base = demand_upper_bound(&s.cost, &s.service, md, 4.0 * MIN).value().unwrap();
        let mut doubled = s.cost;
        doubled.gamma_a *= 2.0;
        let twice = demand_upper_bound(&doubled, &s.service, md, 4.0 * MIN).value().unwrap();
        assert_abs_diff_eq!(twice + operator_term, 2.0 * (base + operator_term), epsilon = 1e-9);
    }

    #[test]
    fn single_parallel_route_is_the_plain_indicator() {
        let s = presets::model1();
        let p = parallel_metrics(&s.cost, &s.service, 0.3556, 4.0 * MIN, 1).unwrap();
        assert_eq!(p.selection_indicator, selection_indicator(&s.cost, &s.service, 0.3556, 4.0 * MIN).unwrap());
        assert_eq!(p.demand_bound, demand_upper_bound(&s.cost, &s.service, 0.3556, 4.0 * MIN));
    }
}
