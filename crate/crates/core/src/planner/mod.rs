//! Planning of timed runs over the region graph that satisfy an MITL
//! formula.

mod progression;
mod search;
mod wts;

use mitl::{accepts, Formula, TimedWord};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::partition::{PartitionError, RegionId};

pub use progression::{fragment_violation, progress, Obligation};
pub use search::{find_accepting_run, find_accepting_run_with, SearchLimits};
pub use wts::Wts;

pub const PLAN_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlannerError {
    #[error("invalid transition system: {0}")]
    InvalidConfig(String),
    #[error("formula outside the plannable fragment: {0}")]
    UnsupportedFragment(String),
    #[error("product search exceeded {limit} states")]
    StateSpaceExceeded { limit: usize },
    #[error("plan is not a run of the transition system: {0}")]
    InvalidPlan(String),
    #[error("unsupported plan format version {0}")]
    Version(u32),
    #[error("found run fails the monitor; this is a bug")]
    SelfCheckFailed,
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("malformed plan file: {0}")]
    Json(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanStep {
    pub region: RegionId,
    pub t: f64,
}

/// One transition of a plan, executed over `[t0, t0 + duration)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: RegionId,
    pub to: RegionId,
    pub t0: f64,
    pub duration: f64,
}

/// A lasso-shaped timed run: `steps` in order, after which the run moves
/// from the last step back to `steps[loop_start]` and repeats forever.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub version: u32,
    pub steps: Vec<PlanStep>,
    pub loop_start: usize,
}

impl Plan {
    /// Timestamps a region sequence, starting at 0.
    pub fn from_regions(
        wts: &Wts,
        regions: &[RegionId],
        loop_start: usize,
    ) -> Result<Self, PlannerError> {
        if regions.is_empty() || loop_start >= regions.len() {
            return Err(PlannerError::InvalidPlan(format!(
                "loop start {loop_start} with {} steps",
                regions.len()
            )));
        }
        let mut t = 0.0;
        let mut steps = Vec::with_capacity(regions.len());
        for (k, &r) in regions.iter().enumerate() {
            if k > 0 {
                t += step_duration(wts, regions[k - 1], r)?;
            }
            steps.push(PlanStep { region: r, t });
        }
        let plan = Self {
            version: PLAN_FORMAT_VERSION,
            steps,
            loop_start,
        };
        plan.closing_duration(wts)?;
        Ok(plan)
    }

    pub fn regions(&self) -> Vec<RegionId> {
        self.steps.iter().map(|s| s.region).collect()
    }

    fn closing_duration(&self, wts: &Wts) -> Result<f64, PlannerError> {
        let last = self
            .steps
            .last()
            .ok_or_else(|| PlannerError::InvalidPlan("no steps".into()))?;
        let first = self
            .steps
            .get(self.loop_start)
            .ok_or_else(|| PlannerError::InvalidPlan("loop start out of range".into()))?;
        step_duration(wts, last.region, first.region)
    }

    /// Duration of one pass around the loop.
    pub fn period(&self, wts: &Wts) -> Result<f64, PlannerError> {
        let last = self.steps.last().map(|s| s.t).unwrap_or(0.0);
        Ok(last - self.steps[self.loop_start].t + self.closing_duration(wts)?)
    }

    /// The transitions of the prefix followed by `laps` passes of the loop.
    pub fn edges(&self, wts: &Wts, laps: usize) -> Result<Vec<Edge>, PlannerError> {
        self.check(wts)?;
        let n = self.steps.len();
        let cycle = n - self.loop_start;
        let total = self.loop_start + laps * cycle;
        let region = |p: usize| {
            if p < n {
                self.steps[p].region
            } else {
                self.steps[self.loop_start + (p - self.loop_start) % cycle].region
            }
        };
        let mut t = 0.0;
        let mut out = Vec::with_capacity(total);
        for p in 0..total {
            let (from, to) = (region(p), region(p + 1));
            let duration = step_duration(wts, from, to)?;
            out.push(Edge {
                from,
                to,
                t0: t,
                duration,
            });
            t += duration;
        }
        Ok(out)
    }

    /// Structural validity: consecutive steps are transitions of `wts` and
    /// timestamps advance by their durations from 0.
    pub fn check(&self, wts: &Wts) -> Result<(), PlannerError> {
        if self.version != PLAN_FORMAT_VERSION {
            return Err(PlannerError::Version(self.version));
        }
        let first = self
            .steps
            .first()
            .ok_or_else(|| PlannerError::InvalidPlan("no steps".into()))?;
        if first.t != 0.0 {
            return Err(PlannerError::InvalidPlan("run must start at t = 0".into()));
        }
        for w in self.steps.windows(2) {
            let d = step_duration(wts, w[0].region, w[1].region)?;
            if (w[1].t - w[0].t - d).abs() > 1e-9 {
                return Err(PlannerError::InvalidPlan(format!(
                    "{} -> {} takes {d} s but the timestamps differ by {}",
                    w[0].region,
                    w[1].region,
                    w[1].t - w[0].t
                )));
            }
        }
        self.closing_duration(wts)?;
        Ok(())
    }

    /// The timed word of region labels this run generates.
    pub fn timed_word(&self, wts: &Wts) -> Result<TimedWord, PlannerError> {
        self.check(wts)?;
        let label = |r: RegionId| wts.labels(r).cloned();
        let prefix = self
            .steps
            .iter()
            .map(|s| Ok((label(s.region)?, s.t)))
            .collect::<Result<Vec<_>, PlannerError>>()?;
        let back = self.steps[self.loop_start].region;
        let mut cycle = vec![(label(back)?, self.closing_duration(wts)?)];
        for w in self.steps[self.loop_start..].windows(2) {
            cycle.push((label(w[1].region)?, w[1].t - w[0].t));
        }
        TimedWord::new(prefix, cycle).map_err(|e| PlannerError::InvalidPlan(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plans always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, PlannerError> {
        let plan: Plan =
            serde_json::from_str(text).map_err(|e| PlannerError::Json(e.to_string()))?;
        if plan.version != PLAN_FORMAT_VERSION {
            return Err(PlannerError::Version(plan.version));
        }
        Ok(plan)
    }
}

fn step_duration(wts: &Wts, a: RegionId, b: RegionId) -> Result<f64, PlannerError> {
    wts.duration(a, b)
        .ok_or_else(|| PlannerError::InvalidPlan(format!("no transition {a} -> {b}")))
}

/// Whether `plan` is a run of `wts` whose timed word satisfies `phi`.
pub fn validate_plan(plan: &Plan, wts: &Wts, phi: &Formula) -> bool {
    plan.timed_word(wts)
        .map(|w| accepts(&w, phi))
        .unwrap_or(false)
}
