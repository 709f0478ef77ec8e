use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Catchment, CostParams, GridGeometry, ServiceConfig};

const WEIGHT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rule {
    NonPositive,
    UnsortedStops,
    StopOutsideRoute,
    WeightsNotNormalized,
    LengthMismatch,
    SpeedOrdering,
    MissingHighwaySpeed,
    BadWindow,
    CombinedVariants,
    /// Warning only: the catchment is wider than a passenger can walk in `s_o`.
    CatchmentExceedsWalkReach,
}

impl Rule {
    pub fn is_fatal(self) -> bool {
        !matches!(self, Rule::CatchmentExceedsWalkReach)
    }

    pub fn message(self) -> &'static str {
        match self {
            Rule::NonPositive => "non-positive parameter",
            Rule::UnsortedStops => "unsorted stops",
            Rule::StopOutsideRoute => "stop outside route",
            Rule::WeightsNotNormalized => "weights not normalized",
            Rule::LengthMismatch => "length mismatch",
            Rule::SpeedOrdering => "speed ordering",
            Rule::MissingHighwaySpeed => "missing highway speed",
            Rule::BadWindow => "bad counting window",
            Rule::CombinedVariants => "parallel and zonal variants combined",
            Rule::CatchmentExceedsWalkReach => "catchment exceeds walk reach",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub rule: Rule,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ({})", self.field, self.rule.message(), self.detail)
    }
}

/// Every fatal violation found in a scenario, plus the warnings seen alongside.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid scenario: {}", .violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
pub struct ValidationErrors {
    pub violations: Vec<Violation>,
}

impl ValidationErrors {
    pub fn has(&self, rule: Rule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

struct Checker {
    found: Vec<Violation>,
}

impl Checker {
    fn push(&mut self, field: &str, rule: Rule, detail: String) {
        self.found.push(Violation {
            field: field.to_string(),
            rule,
            detail,
        });
    }

    fn positive(&mut self, field: &str, value: f64) {
        if !(value > 0.0) || !value.is_finite() {
            self.push(field, Rule::NonPositive, format!("{value} must be > 0"));
        }
    }

    fn non_negative(&mut self, field: &str, value: f64) {
        if !(value >= 0.0) || !value.is_finite() {
            self.push(field, Rule::NonPositive, format!("{value} must be >= 0"));
        }
    }
}

/// Checks the invariants of the three parameter groups.
///
/// Returns the warnings when nothing fatal was found, otherwise every
/// violation (fatal and warning) in discovery order.
pub fn validate_scenario(
    cost: &CostParams,
    grid: &GridGeometry,
    svc: &ServiceConfig,
) -> Result<Vec<Violation>, ValidationErrors> {
    let mut c = Checker { found: Vec::new() };

    c.positive("cost.gamma_a", cost.gamma_a);
    c.positive("cost.gamma_w", cost.gamma_w);
    c.positive("cost.gamma_r", cost.gamma_r);
    c.positive("cost.gamma_o", cost.gamma_o);
    c.positive("cost.vot", cost.vot);

    c.positive("grid.l_x", grid.l_x);
    c.positive("grid.l_y", grid.l_y);
    c.positive("grid.gl_x", grid.gl_x);
    c.positive("grid.d_xs", grid.d_xs);
    match &grid.gl_y {
        Catchment::Uniform(w) => c.positive("grid.gl_y", *w),
        Catchment::PerStop(ws) => {
            if ws.len() != grid.n_stops() {
                c.push(
                    "grid.gl_y",
                    Rule::LengthMismatch,
                    format!("{} widths for {} stops", ws.len(), grid.n_stops()),
                );
            }
            for (i, w) in ws.iter().enumerate() {
                c.positive(&format!("grid.gl_y[{i}]"), *w);
            }
        }
    }

    if grid.stop_chainages.is_empty() {
        c.push("grid.stop_chainages", Rule::LengthMismatch, "no stops".into());
    }
    for (i, pair) in grid.stop_chainages.windows(2).enumerate() {
        if !(pair[1] > pair[0]) {
            c.push(
                "grid.stop_chainages",
                Rule::UnsortedStops,
                format!("stop {} at {} is not after {}", i + 1, pair[1], pair[0]),
            );
        }
    }
    for (i, &s) in grid.stop_chainages.iter().enumerate() {
        if !(0.0..=grid.gl_x).contains(&s) {
            c.push(
                "grid.stop_chainages",
                Rule::StopOutsideRoute,
                format!("stop {i} at {s} outside [0, {}]", grid.gl_x),
            );
        }
    }
    if grid.stop_weights.len() != grid.n_stops() {
        c.push(
            "grid.stop_weights",
            Rule::LengthMismatch,
            format!("{} weights for {} stops", grid.stop_weights.len(), grid.n_stops()),
        );
    }
    for (i, &w) in grid.stop_weights.iter().enumerate() {
        c.non_negative(&format!("grid.stop_weights[{i}]"), w);
    }
    let total: f64 = grid.stop_weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_TOLERANCE {
        c.push(
            "grid.stop_weights",
            Rule::WeightsNotNormalized,
            format!("weights sum to {total}"),
        );
    }

    c.positive("service.headway", svc.headway);
    if svc.capacity < 1 {
        c.push("service.capacity", Rule::NonPositive, "capacity must be >= 1".into());
    }
    if svc.fixed_capacity == Some(0) {
        c.push("service.fixed_capacity", Rule::NonPositive, "capacity must be >= 1".into());
    }
    if svc.n_parallel < 1 {
        c.push("service.n_parallel", Rule::NonPositive, "must be >= 1".into());
    }
    if svc.n_zones < 1 {
        c.push("service.n_zones", Rule::NonPositive, "must be >= 1".into());
    }
    if svc.n_parallel > 1 && svc.n_zones > 1 {
        c.push(
            "service",
            Rule::CombinedVariants,
            "choose either parallel routes or zonal express".into(),
        );
    }
    c.positive("service.v_d", svc.v_d);
    c.positive("service.v_w", svc.v_w);
    c.non_negative("service.t_s", svc.t_s);
    c.non_negative("service.t_s_prime", svc.t_s_prime);
    c.non_negative("service.lambda", svc.lambda);
    c.positive("service.s_o", svc.s_o);
    c.positive("service.horizon", svc.horizon);
    if !(svc.v_d > svc.v_w) {
        c.push(
            "service.v_d",
            Rule::SpeedOrdering,
            format!("bus speed {} must exceed walking speed {}", svc.v_d, svc.v_w),
        );
    }
    match svc.v_h {
        Some(v_h) => {
            c.positive("service.v_h", v_h);
            if v_h < svc.v_d {
                c.push(
                    "service.v_h",
                    Rule::SpeedOrdering,
                    format!("highway speed {v_h} below street speed {}", svc.v_d),
                );
            }
        }
        None if svc.n_zones > 1 => c.push(
            "service.v_h",
            Rule::MissingHighwaySpeed,
            "zonal express needs a highway speed".into(),
        ),
        None => {}
    }
    let (lo, hi) = svc.warmup_window;
    if !(lo >= 0.0 && hi > lo && hi <= svc.horizon) {
        c.push(
            "service.warmup_window",
            Rule::BadWindow,
            format!("[{lo}, {hi}) must lie inside [0, {}]", svc.horizon),
        );
    }

    let reach = svc.s_o * svc.v_w;
    let widest = grid.gl_y.max();
    if widest > reach + 1e-9 {
        c.push(
            "grid.gl_y",
            Rule::CatchmentExceedsWalkReach,
            format!("half-width {widest} km beyond walk reach {reach} km"),
        );
    }

    if c.found.iter().any(|v| v.rule.is_fatal()) {
        Err(ValidationErrors { violations: c.found })
    } else {
        Ok(c.found)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets;

    #[test]
    fn model1_is_valid_without_warnings() {
        let s = presets::model1();
        assert_eq!(s.validate().unwrap(), vec![]);
    }

    #[test]
    fn negative_operator_cost_is_rejected() {
        let mut s = presets::model1();
        s.cost.gamma_o = -1.0;
        let err = s.validate().unwrap_err();
        assert!(err.has(Rule::NonPositive));
        assert_eq!(err.violations[0].field, "cost.gamma_o");
        assert_eq!(err.violations[0].rule.message(), "non-positive parameter");
    }

    #[test]
    fn unnormalized_weights_are_rejected() {
        let mut s = presets::model1();
        s.grid.stop_chainages = vec![1.0, 2.0];
        s.grid.stop_weights = vec![0.5, 0.4];
        let err = s.validate().unwrap_err();
        assert!(err.has(Rule::WeightsNotNormalized));
    }

    #[test]
    fn unsorted_stops_are_rejected() {
        let mut s = presets::model1();
        s.grid.stop_chainages.swap(3, 4);
        assert!(s.validate().unwrap_err().has(Rule::UnsortedStops));
    }

    #[test]
    fn every_violation_is_reported() {
        let mut s = presets::model1();
        s.cost.vot = 0.0;
        s.service.headway = 0.0;
        s.grid.stop_weights[0] = 0.5;
        let err = s.validate().unwrap_err();
        assert!(err.violations.len() >= 3);
    }

    #[test]
    fn wide_catchment_is_only_a_warning() {
        let mut s = presets::model1();
        s.grid.gl_y = Catchment::Uniform(1.0);
        let warnings = s.validate().unwrap();
        assert_eq!(warnings.len(), 1);
        assert_eq!(warnings[0].rule, Rule::CatchmentExceedsWalkReach);
    }

    #[test]
    fn zonal_requires_highway_speed() {
        let mut s = presets::model1();
        s.service.n_zones = 2;
        assert!(s.validate().unwrap_err().has(Rule::MissingHighwaySpeed));
        s.service.v_h = Some(50.0);
        assert!(s.validate().is_ok());
    }

    #[test]
    fn validation_is_idempotent() {
        let s = presets::model2();
        let before = s.clone();
        let a = s.validate();
        let b = s.validate();
        assert_eq!(a, b);
        assert_eq!(s, before);
    }
}
