use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::summarize_finite;
use super::ExperimentError;
use crate::model::{Scenario, ScenarioStats};
use crate::simulator::{replication_rng, sample_requests, simulate, Mode, SimError, Timeline};

/// Counted-window outcome of one mode in one replication.
///
/// Waits and IVTT are passenger means (h). Passenger cost rows sum over
/// requests made inside the counted window; the operator row sums over every
/// departure in the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeOutcome {
    pub passengers: usize,
    pub wait: f64,
    pub ivtt: f64,
    pub c_a: f64,
    pub c_w: f64,
    pub c_r: f64,
    pub c_o: f64,
    /// Mean cross-street distance per trip (km).
    pub trip_d_y: f64,
    /// Counted requests never picked up.
    pub unserved: usize,
}

impl ModeOutcome {
    pub fn total(&self) -> f64 {
        self.c_a + self.c_w + self.c_r + self.c_o
    }

    pub fn from_timeline(timeline: &Timeline, requests_t_k: &[f64], scenario: &Scenario) -> Self {
        let (cost, svc) = (&scenario.cost, &scenario.service);
        let (mut n, mut a, mut w, mut r) = (0usize, 0.0, 0.0, 0.0);
        for p in timeline.passengers().filter(|p| svc.counts(p.t_k)) {
            n += 1;
            a += p.access;
            w += p.wait;
            r += p.ivtt;
        }
        let trips = timeline.trips.len().max(1) as f64;
        let d_y: f64 = timeline.trips.iter().filter_map(|t| t.plan.as_ref()).map(|p| p.d_y).sum();
        let unserved = timeline
            .unserved
            .iter()
            .filter(|&&id| svc.counts(requests_t_k[id as usize]))
            .count();
        let mean = |v: f64| if n > 0 { v / n as f64 } else { f64::NAN };
        Self {
            passengers: n,
            wait: mean(w),
            ivtt: mean(r),
            c_a: cost.gamma_a * cost.vot * a,
            c_w: cost.gamma_w * cost.vot * w,
            c_r: cost.gamma_r * cost.vot * r,
            c_o: timeline.operator_cost(),
            trip_d_y: d_y / trips,
            unserved,
        }
    }
}

/// Both modes on one demand realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicationPair {
    pub replication: usize,
    pub baseline: ModeOutcome,
    pub candidate: ModeOutcome,
}

impl ReplicationPair {
    /// Candidate total minus baseline total.
    pub fn delta_tc(&self) -> f64 {
        self.candidate.total() - self.baseline.total()
    }
}

/// Replication results of one scenario, fixed route against minibus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRun {
    pub scenario: String,
    pub seed: u64,
    pub baseline_mode: Mode,
    pub candidate_mode: Mode,
    pub fixed: ScenarioStats,
    pub amsod: ScenarioStats,
    pub delta_tc: Vec<f64>,
    pub pairs: Vec<ReplicationPair>,
}

/// One replication: sample demand once and dispatch it in both modes.
pub fn run_replication(
    scenario: &Scenario,
    baseline: Mode,
    candidate: Mode,
    seed: u64,
    replication: usize,
) -> Result<ReplicationPair, SimError> {
    let requests = sample_requests(
        &scenario.grid,
        &scenario.service,
        &mut replication_rng(seed, replication as u64),
    );
    let t_k: Vec<f64> = requests.iter().map(|r| r.t_k).collect();
    let base = simulate(scenario, baseline, &requests)?;
    let cand = simulate(scenario, candidate, &requests)?;
    Ok(ReplicationPair {
        replication,
        baseline: ModeOutcome::from_timeline(&base, &t_k, scenario),
        candidate: ModeOutcome::from_timeline(&cand, &t_k, scenario),
    })
}

fn stats(outcomes: &[ModeOutcome], delta: &[f64]) -> ScenarioStats {
    let col = |f: fn(&ModeOutcome) -> f64| summarize_finite(outcomes.iter().map(f));
    ScenarioStats {
        wait: col(|o| o.wait),
        ivtt: col(|o| o.ivtt),
        c_a: col(|o| o.c_a),
        c_w: col(|o| o.c_w),
        c_r: col(|o| o.c_r),
        c_o: col(|o| o.c_o),
        tc: col(ModeOutcome::total),
        delta_tc: summarize_finite(delta.iter().copied()),
        passengers: col(|o| o.passengers as f64),
        trip_d_y: col(|o| o.trip_d_y),
        unserved: col(|o| o.unserved as f64),
        replications: outcomes.len(),
    }
}

/// Runs `replications` paired replications of `baseline` against `candidate`
/// on common random numbers.
///
/// Replications are spread over the rayon pool; each draws its own stream
/// from `(seed, index)` and results are gathered in index order, so the
/// output does not depend on the number of workers.
pub fn run_paired(
    scenario: &Scenario,
    baseline: Mode,
    candidate: Mode,
    replications: usize,
    seed: u64,
) -> Result<ScenarioRun, ExperimentError> {
    if replications == 0 {
        return Err(ExperimentError::EmptyInput);
    }
    scenario.validate().map_err(SimError::from)?;
    let pairs: Vec<ReplicationPair> = (0..replications)
        .into_par_iter()
        .map(|j| run_replication(scenario, baseline, candidate, seed, j))
        .collect::<Result<_, _>>()?;
    let delta_tc: Vec<f64> = pairs.iter().map(ReplicationPair::delta_tc).collect();
    let base: Vec<ModeOutcome> = pairs.iter().map(|p| p.baseline).collect();
    let cand: Vec<ModeOutcome> = pairs.iter().map(|p| p.candidate).collect();
    Ok(ScenarioRun {
        scenario: scenario.name.clone(),
        seed,
        baseline_mode: baseline,
        candidate_mode: candidate,
        fixed: stats(&base, &delta_tc),
        amsod: stats(&cand, &delta_tc),
        delta_tc,
        pairs,
    })
}

/// Fixed route against semi-on-demand minibus, `ΔTC = amsod − fixed`.
pub fn run_scenario(scenario: &Scenario, replications: usize, seed: u64) -> Result<ScenarioRun, ExperimentError> {
    run_paired(scenario, Mode::Fixed, Mode::Amsod, replications, seed)
}
