//! The hybrid executive: runs a plan transition by transition on the
//! simulated team, logs the run and checks it afterwards.

mod scenario;
mod trace;
mod verify;

use thiserror::Error;

use crate::control::ControlError;
use crate::dynamics::{CoupledState, DynamicsError};
use crate::kinematics::KinematicsError;
use crate::partition::RegionId;
use crate::planner::{Edge, Plan, PlannerError};
use crate::trajectory::{TrajectoryError, TransitionTrajectory};

pub use scenario::{
    AgentSection, ControlSection, DisturbanceSection, DurationOverride, ObjectSection,
    PartitionSection, Scenario, ScenarioError, Setup, TimingSection,
};
pub use trace::{Trace, TraceError, TraceRow, TRACE_FORMAT_VERSION};
pub use verify::{
    verify_trace, ContainmentViolation, Report, SegmentMargins, REPORT_FORMAT_VERSION,
};

#[derive(Debug, Error)]
pub enum ExecutionError {
    #[error(transparent)]
    Plan(#[from] PlannerError),
    #[error("transition {from} -> {to} lasts {duration} s, not a whole number of {dt} s steps")]
    StepMismatch {
        from: RegionId,
        to: RegionId,
        duration: f64,
        dt: f64,
    },
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Envelope(#[from] ControlError),
    #[error("t = {t}: system is not inside {region}")]
    RegionAssertionFailed { t: f64, region: RegionId },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

/// Number of integration steps of length `dt` in `duration`, if whole.
fn step_count(duration: f64, dt: f64) -> Option<usize> {
    let n = duration / dt;
    let r = n.round();
    (r >= 1.0 && (n - r).abs() <= 1e-9 * r.max(1.0)).then_some(r as usize)
}

/// Simulates the plan's prefix followed by `scenario.loop_periods` laps of
/// its loop.
pub fn execute_plan(setup: &Setup, plan: &Plan) -> Result<Trace, ExecutionError> {
    if plan.steps.first().map(|s| s.region) != Some(setup.initial_region) {
        return Err(PlannerError::InvalidPlan(format!(
            "plan does not start in the initial region {}",
            setup.initial_region
        ))
        .into());
    }
    let edges = plan.edges(&setup.wts, setup.scenario.loop_periods)?;
    execute_edges(setup, &edges)
}

/// Simulates an explicit sequence of transitions from the initial state.
pub fn execute_edges(setup: &Setup, edges: &[Edge]) -> Result<Trace, ExecutionError> {
    let dt = setup.scenario.dt;
    let sys = &setup.system;
    let ctl = &setup.controller;
    let mut trace = Trace::new(setup.scenario.seed, dt, sys.agents.len());
    let mut s: CoupledState = setup.initial_state;
    let mut region = setup.initial_region;

    let mut log = |s: &CoupledState,
                   seg: usize,
                   e: &Edge,
                   u,
                   d: crate::control::Diagnostics|
     -> Result<(), ExecutionError> {
        let a = sys.acceleration(s, &u)?;
        let lambda = sys.interaction_wrenches(s, &u, &a)?;
        trace.rows.push(TraceRow {
            t: s.t,
            x: s.x.to_vector(),
            v: s.v,
            u,
            lambda,
            segment: seg,
            from: e.from,
            to: e.to,
            e_s: d.e_s,
            rho_s: d.rho_s,
            e_v: d.e_v,
            rho_v: d.rho_v,
            xd: d.desired.x,
        });
        Ok(())
    };

    for (seg, e) in edges.iter().enumerate() {
        if e.from != region {
            return Err(PlannerError::InvalidPlan(format!(
                "transition {seg} leaves {} but the team is in {region}",
                e.from
            ))
            .into());
        }
        let n = step_count(e.duration, dt).ok_or(ExecutionError::StepMismatch {
            from: e.from,
            to: e.to,
            duration: e.duration,
            dt,
        })?;
        s.t = e.t0;
        if !setup.in_region(&s.x, e.from) {
            return Err(ExecutionError::RegionAssertionFailed {
                t: s.t,
                region: e.from,
            });
        }
        let traj = TransitionTrajectory::between(
            setup.partition(),
            e.from,
            e.to,
            e.duration,
            e.t0,
            setup.eta_d,
        )?;
        let cs = ctl.init_transition(&s.x, &s.v, traj, e.t0)?;
        for k in 0..n {
            s.t = e.t0 + k as f64 * dt;
            let (u, d) = ctl.tick(&cs, &s.x, &s.v, s.t)?;
            log(&s, seg, e, u.clone(), d)?;
            s = sys.step(&s, &u, dt)?;
        }
        s.t = e.t0 + e.duration;
        if !setup.in_region(&s.x, e.to) {
            return Err(ExecutionError::RegionAssertionFailed {
                t: s.t,
                region: e.to,
            });
        }
        region = e.to;
        if seg + 1 == edges.len() {
            let (u, d) = ctl.tick(&cs, &s.x, &s.v, s.t)?;
            log(&s, seg, e, u, d)?;
        }
    }
    Ok(trace)
}
