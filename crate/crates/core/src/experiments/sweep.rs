use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::runner::run_scenario;
use super::ExperimentError;
use crate::model::{Scenario, Summary};

/// Scenario parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepDimension {
    /// Minibus capacity; the fixed-route bus keeps the base capacity.
    Capacity,
    /// Demand rate (passengers/h).
    Lambda,
}

impl FromStr for SweepDimension {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "capacity" => Ok(Self::Capacity),
            "lambda" => Ok(Self::Lambda),
            other => Err(ExperimentError::InvalidSweep(format!(
                "unknown dimension {other:?}; expected capacity or lambda"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub dimension: SweepDimension,
    pub values: Vec<f64>,
    pub replications: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.values.is_empty() {
            return Err(ExperimentError::InvalidSweep("no sweep values".into()));
        }
        if self.values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ExperimentError::InvalidSweep("sweep values must be strictly increasing".into()));
        }
        if self.replications == 0 {
            return Err(ExperimentError::InvalidSweep("at least one replication per value".into()));
        }
        let bad = |v: &f64| match self.dimension {
            SweepDimension::Capacity => *v < 1.0 || v.fract() != 0.0,
            SweepDimension::Lambda => !(*v >= 0.0 && v.is_finite()),
        };
        if let Some(v) = self.values.iter().find(|v| bad(v)) {
            return Err(ExperimentError::InvalidSweep(format!(
                "value {v} is not a valid {:?}",
                self.dimension
            )));
        }
        Ok(())
    }

    /// The base scenario with the swept parameter set to `value`.
    pub fn apply(&self, base: &Scenario, value: f64) -> Scenario {
        let mut s = base.clone();
        match self.dimension {
            SweepDimension::Capacity => {
                s.service.fixed_capacity = Some(base.service.fixed_capacity());
                s.service.capacity = value as u32;
            }
            SweepDimension::Lambda => s.service.lambda = value,
        }
        s
    }
}

/// One sweep point. Waits and IVTT are means over replications (h).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub delta_tc: Summary,
    pub fixed_wait: f64,
    pub fixed_ivtt: f64,
    pub amsod_wait: f64,
    pub amsod_ivtt: f64,
}

/// Runs every sweep value on the same seed, so all points share demand
/// streams and differences reflect the parameter rather than sampling noise.
pub fn sweep(base: &Scenario, spec: &SweepSpec, seed: u64) -> Result<Vec<SweepRow>, ExperimentError> {
    spec.validate()?;
    spec.values
        .iter()
        .map(|&value| {
            let run = run_scenario(&spec.apply(base, value), spec.replications, seed)?;
            Ok(SweepRow {
                value,
                delta_tc: run.amsod.delta_tc,
                fixed_wait: run.fixed.wait.mean,
                fixed_ivtt: run.fixed.ivtt.mean,
                amsod_wait: run.amsod.wait.mean,
                amsod_ivtt: run.amsod.ivtt.mean,
            })
        })
        .collect()
}

/// Writes sweep rows as CSV, times in minutes.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], dimension: SweepDimension, out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    let name = match dimension {
        SweepDimension::Capacity => "capacity",
        SweepDimension::Lambda => "lambda_per_h",
    };
    w.write_record([
        name,
        "delta_tc_median",
        "delta_tc_p2_5",
        "delta_tc_p97_5",
        "fixed_wait_min",
        "fixed_ivtt_min",
        "amsod_wait_min",
        "amsod_ivtt_min",
    ])?;
    for r in rows {
        w.write_record([
            r.value.to_string(),
            r.delta_tc.median.to_string(),
            r.delta_tc.lower.to_string(),
            r.delta_tc.upper.to_string(),
            (r.fixed_wait * 60.0).to_string(),
            (r.fixed_ivtt * 60.0).to_string(),
            (r.amsod_wait * 60.0).to_string(),
            (r.amsod_ivtt * 60.0).to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets;

    fn spec(values: Vec<f64>) -> SweepSpec {
        SweepSpec {
            dimension: SweepDimension::Capacity,
            values,
            replications: 20,
        }
    }

    #[test]
    fn values_must_increase() {
        assert!(spec(vec![]).validate().is_err());
        assert!(spec(vec![20.0, 15.0]).validate().is_err());
        assert!(spec(vec![15.5]).validate().is_err());
        assert!(spec(vec![15.0, 20.0]).validate().is_ok());
    }

    #[test]
    fn capacity_sweep_keeps_the_fixed_bus() {
        let base = presets::model1();
        let s = spec(vec![15.0]).apply(&base, 15.0);
        assert_eq!(s.service.capacity, 15);
        assert_eq!(s.service.fixed_capacity(), 30);
    }

    #[test]
    fn single_value_matches_run_scenario() {
        let base = presets::model1();
        let sp = spec(vec![30.0]);
        let rows = sweep(&base, &sp, 3).unwrap();
        let run = run_scenario(&sp.apply(&base, 30.0), 20, 3).unwrap();
        assert_eq!(rows[0].delta_tc, run.amsod.delta_tc);
        assert_eq!(rows[0].amsod_ivtt, run.amsod.ivtt.mean);
    }

    #[test]
    fn parses_dimension_names() {
        assert_eq!("lambda".parse::<SweepDimension>().unwrap(), SweepDimension::Lambda);
        assert!("speed".parse::<SweepDimension>().is_err());
    }
}
