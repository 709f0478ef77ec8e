//! Zonal express: the suburb length is split into `n` equal zones, each
//! served locally by every `n`-th bus, which then runs express at highway
//! speed for the rest of the suburb.
//!
//! Per zone the local headway is `nH` and the zone demand `λ/n`, so a trip
//! still carries `λH` passengers on average. Averaged over zones:
//!
//! * wait: `nH/2 + σ²/(2nH)` with σ² evaluated at `K = λH`;
//! * ride: `GL_x/(2n v_d) + GL_x(n-1)/(2n v_h)` plus the detour and dwell
//!   terms of a single route;
//! * operator distance per hour: `GL_x(n+1)/(2nH) + λ MD`.
//!
//! Collecting terms gives `TC'_z(n) = A n + B/n + C` with
//! `A = γ_w VOT λ H/2` and
//! `B = γ_w VOT λ σ²/(2H) + γ_r VOT λ GL_x (1/v_d - 1/v_h)/2 + γ_o GL_x/(2H)`,
//! minimized at `n* = sqrt(B/A)`.

use serde::{Deserialize, Serialize};

use super::{amsod_headway_variance, AnalyticError, CostSummary};
use crate::model::{CostParams, GridGeometry, ServiceConfig};

/// Hourly cost of the semi-on-demand service split into `n` zones.
///
/// `v_h` is ignored for `n = 1`.
pub fn zonal_tc(
    cost: &CostParams,
    grid: &GridGeometry,
    svc: &ServiceConfig,
    md: f64,
    n: u32,
    v_h: f64,
) -> CostSummary {
    let n = n.max(1) as f64;
    let h = svc.headway;
    let k = svc.lambda * h;
    let variance = amsod_headway_variance(k, md, svc.v_d, svc.t_s_prime);
    let wait_h = n * h / 2.0 + variance / (2.0 * n * h);
    let express = if n > 1.0 {
        grid.gl_x * (n - 1.0) / (2.0 * n * v_h)
    } else {
        0.0
    };
    let ivtt_h = grid.gl_x / (2.0 * n * svc.v_d) + express + k * md / (2.0 * svc.v_d) + svc.t_s_prime * k / 2.0;
    let lam = cost.vot * svc.lambda;
    let access = 0.0;
    let wait = cost.gamma_w * lam * wait_h;
    let ride = cost.gamma_r * lam * ivtt_h;
    let operator = cost.gamma_o * (grid.gl_x * (n + 1.0) / (2.0 * n * h) + svc.lambda * md);
    CostSummary {
        access,
        wait,
        ride,
        operator,
        total: access + wait + ride + operator,
        expected_wait: wait_h,
        expected_ivtt: ivtt_h,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZonalPlan {
    /// `(n, cost)` for `n = 1..=n_max`.
    pub table: Vec<(u32, CostSummary)>,
    /// Real-valued stationary point `sqrt(B/A)`.
    pub n_star: f64,
    /// Integer optimum from the closed form.
    pub n_closed: u32,
    /// Integer optimum by scanning the table.
    pub n_brute: u32,
}

/// Coefficients `(A, B)` of `TC'_z(n) = A n + B/n + C`.
fn coefficients(cost: &CostParams, grid: &GridGeometry, svc: &ServiceConfig, md: f64, v_h: f64) -> (f64, f64) {
    let h = svc.headway;
    let lam = cost.vot * svc.lambda;
    let variance = amsod_headway_variance(svc.lambda * h, md, svc.v_d, svc.t_s_prime);
    let a = cost.gamma_w * lam * h / 2.0;
    let b = cost.gamma_w * lam * variance / (2.0 * h)
        + cost.gamma_r * lam * grid.gl_x * (1.0 / svc.v_d - 1.0 / v_h) / 2.0
        + cost.gamma_o * grid.gl_x / (2.0 * h);
    (a, b)
}

/// Evaluates `n = 1..=n_max` zones and locates the optimum both ways.
///
/// The closed-form integer is the smallest `n` with `n(n+1) >= B/A`, which
/// is where `A n + B/n` stops decreasing; exact ties keep fewer zones.
pub fn zonal_plan(
    cost: &CostParams,
    grid: &GridGeometry,
    svc: &ServiceConfig,
    md: f64,
    n_max: u32,
) -> Result<ZonalPlan, AnalyticError> {
    if n_max < 1 {
        return Err(AnalyticError::NoZones);
    }
    let v_h = match svc.v_h {
        Some(v) => v,
        None if n_max > 1 => return Err(AnalyticError::MissingHighwaySpeed),
        None => svc.v_d,
    };
    let table: Vec<(u32, CostSummary)> = (1..=n_max)
        .map(|n| (n, zonal_tc(cost, grid, svc, md, n, v_h)))
        .collect();
    let mut n_brute = 1;
    let mut best = table[0].1.total;
    for (n, c) in &table[1..] {
        if c.total < best {
            best = c.total;
            n_brute = *n;
        }
    }

    let (a, b) = coefficients(cost, grid, svc, md, v_h);
    let ratio = b / a;
    let n_star = ratio.max(0.0).sqrt();
    let mut n_closed = 1u32;
    while n_closed < n_max && (n_closed as f64) * (n_closed as f64 + 1.0) < ratio {
        n_closed += 1;
    }
    Ok(ZonalPlan {
        table,
        n_star,
        n_closed,
        n_brute,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::hourly_cost_amsod;
    use crate::model::presets;

    #[test]
    fn one_zone_is_the_single_route() {
        let s = presets::model1();
        let z = zonal_tc(&s.cost, &s.grid, &s.service, 0.3556, 1, 50.0);
        assert_eq!(z, hourly_cost_amsod(&s.cost, &s.grid, &s.service, 0.3556));
    }

    #[test]
    fn closed_form_matches_brute_force_for_model1_with_highway() {
        let mut s = presets::model1();
        s.service.v_h = Some(50.0);
        let plan = zonal_plan(&s.cost, &s.grid, &s.service, s.md(), 6).unwrap();
        assert_eq!(plan.n_closed, plan.n_brute);
        assert_eq!(plan.table.len(), 6);
    }

    #[test]
    fn more_zones_with_shorter_headway() {
        let mut s = presets::model1();
        s.service.v_h = Some(80.0);
        let mut last = 0;
        for h in [1.0, 0.5, 0.25, 0.125, 0.0625] {
            s.service.headway = h;
            let plan = zonal_plan(&s.cost, &s.grid, &s.service, s.md(), 20).unwrap();
            assert!(plan.n_closed >= last, "h = {h}");
            last = plan.n_closed;
        }
    }

    #[test]
    fn missing_highway_speed() {
        let s = presets::model1();
        assert_eq!(
            zonal_plan(&s.cost, &s.grid, &s.service, 0.3, 3),
            Err(AnalyticError::MissingHighwaySpeed)
        );
        assert!(zonal_plan(&s.cost, &s.grid, &s.service, 0.3, 1).is_ok());
    }
}
