//! Post-hoc checks of a logged execution against its plan and mission.

use mitl::{accepts, Symbol, TimedWord};
use serde::{Deserialize, Serialize};

use crate::kinematics::{agent_jacobians, Pose, Vec3};
use crate::partition::RegionId;
use crate::planner::Plan;

use super::{Setup, Trace};

pub const REPORT_FORMAT_VERSION: u32 = 1;
const CONTAINMENT_TOL: f64 = 1e-9;
const MAX_LISTED: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentViolation {
    pub t: f64,
    pub segment: usize,
    /// A body point, or the object centre when the ball check failed.
    pub point: [f64; 3],
    pub ball: bool,
}

/// Worst-case envelope use over one transition: `1 − max |e| / ρ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentMargins {
    pub segment: usize,
    pub from: RegionId,
    pub to: RegionId,
    pub pose_margin: f64,
    pub velocity_margin: f64,
    pub max_tube_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: u32,
    pub ok: bool,
    pub satisfied: bool,
    /// Whether every planned transition appears in full.
    pub complete: bool,
    /// Region sequence read off the trace, with entry times.
    pub observed_run: Vec<(RegionId, f64)>,
    pub fidelity_errors: Vec<String>,
    pub max_entry_offset: f64,
    pub containment_violation_count: usize,
    pub containment_violations: Vec<ContainmentViolation>,
    pub tube_violation_count: usize,
    pub envelope_violation_count: usize,
    pub segments: Vec<SegmentMargins>,
    pub max_control_norm: f64,
    pub saturation_threshold: f64,
    pub saturated: bool,
    pub non_finite_rows: usize,
    pub max_load_sharing_error: f64,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

fn margin(e: &[f64], rho: &[f64]) -> f64 {
    e.iter()
        .zip(rho)
        .map(|(e, r)| 1.0 - e.abs() / r)
        .fold(f64::INFINITY, f64::min)
}

pub fn verify_trace(trace: &Trace, plan: &Plan, setup: &Setup) -> Report {
    let wts = &setup.wts;
    let part = setup.partition();
    let l_hat = part.config().l_hat;
    let l0 = part.config().l0;
    let dt = trace.dt;
    let mut fidelity_errors = Vec::new();
    let expected = match plan.edges(wts, setup.scenario.loop_periods) {
        Ok(e) => e,
        Err(e) => {
            fidelity_errors.push(format!("plan: {e}"));
            Vec::new()
        }
    };

    let mut observed: Vec<(usize, RegionId, RegionId, f64)> = Vec::new();
    let mut segments: Vec<SegmentMargins> = Vec::new();
    let mut containment_violations = Vec::new();
    let mut containment_violation_count = 0;
    let mut tube_violation_count = 0;
    let mut envelope_violation_count = 0;
    let mut max_control_norm: f64 = 0.0;
    let mut non_finite_rows = 0;
    let mut max_load_sharing_error: f64 = 0.0;
    let mut prev_t = f64::NEG_INFINITY;
    let shares = &setup.controller.gains.shares;

    for r in &trace.rows {
        if !(r.t > prev_t) {
            fidelity_errors.push(format!("time does not increase at t = {}", r.t));
        }
        prev_t = r.t;
        if observed.last().map(|o| o.0) != Some(r.segment) {
            observed.push((r.segment, r.from, r.to, r.t));
            segments.push(SegmentMargins {
                segment: r.segment,
                from: r.from,
                to: r.to,
                pose_margin: f64::INFINITY,
                velocity_margin: f64::INFINITY,
                max_tube_distance: 0.0,
            });
        }
        let seg = segments.last_mut().expect("pushed above");

        let finite = [&r.x, &r.v, &r.e_s, &r.rho_s, &r.e_v, &r.rho_v, &r.xd]
            .iter()
            .all(|m| m.iter().all(|v| v.is_finite()))
            && r.u.iter().chain(r.lambda.iter()).all(|v| v.is_finite());
        if !finite {
            non_finite_rows += 1;
            continue;
        }

        let ms = margin(r.e_s.as_slice(), r.rho_s.as_slice());
        let mv = margin(r.e_v.as_slice(), r.rho_v.as_slice());
        seg.pose_margin = seg.pose_margin.min(ms);
        seg.velocity_margin = seg.velocity_margin.min(mv);
        if ms <= 0.0 || mv <= 0.0 {
            envelope_violation_count += 1;
        }

        let x = Pose::from_vector(&r.x);
        let pd = r.xd.fixed_rows::<3>(0).into_owned();
        let d = (x.p - pd).norm();
        seg.max_tube_distance = seg.max_tube_distance.max(d);
        if !(d < l0) {
            tube_violation_count += 1;
        }

        match part.transition_hull(r.from, r.to) {
            Ok(hull) => {
                let mut bad: Vec<(Vec3, bool)> = setup
                    .body_points(&x)
                    .into_iter()
                    .filter(|p| !hull.contains_closed(p, CONTAINMENT_TOL))
                    .map(|p| (p, false))
                    .collect();
                if !hull.contains_ball(&x.p, l_hat, CONTAINMENT_TOL) {
                    bad.push((x.p, true));
                }
                containment_violation_count += bad.len();
                for (p, ball) in bad {
                    if containment_violations.len() < MAX_LISTED {
                        containment_violations.push(ContainmentViolation {
                            t: r.t,
                            segment: r.segment,
                            point: [p.x, p.y, p.z],
                            ball,
                        });
                    }
                }
            }
            Err(e) => fidelity_errors.push(format!("t = {}: {e}", r.t)),
        }

        let n_agents = r.u.len() / 6;
        for i in 0..n_agents {
            max_control_norm = max_control_norm.max(r.u.fixed_rows::<6>(6 * i).norm());
        }
        if let (Ok(jac), true) = (
            agent_jacobians(&x, &setup.controller.grasps),
            n_agents == shares.len(),
        ) {
            let reflected = |i: usize| jac[i].transpose() * r.u.fixed_rows::<6>(6 * i) / shares[i];
            let first = reflected(0);
            if first.norm() > 1e-12 {
                for i in 1..n_agents {
                    max_load_sharing_error =
                        max_load_sharing_error.max((reflected(i) - first).norm() / first.norm());
                }
            }
        }
    }

    let mut max_entry_offset: f64 = 0.0;
    if observed.len() > expected.len() {
        fidelity_errors.push(format!(
            "{} transitions logged but the plan has {}",
            observed.len(),
            expected.len()
        ));
    }
    for (k, (&(seg, from, to, t), e)) in observed.iter().zip(&expected).enumerate() {
        if seg != k || from != e.from || to != e.to {
            fidelity_errors.push(format!(
                "transition {k}: logged {seg} {from} -> {to}, planned {} -> {}",
                e.from, e.to
            ));
        }
        max_entry_offset = max_entry_offset.max((t - e.t0).abs());
        if (t - e.t0).abs() > dt * (1.0 + 1e-9) {
            fidelity_errors.push(format!("{from} entered at {t}, planned at {}", e.t0));
        }
    }
    let planned_end = expected.last().map(|e| e.t0 + e.duration);
    let complete = !observed.is_empty()
        && observed.len() == expected.len()
        && matches!((trace.end_time(), planned_end), (Some(a), Some(b)) if (a - b).abs() <= dt * (1.0 + 1e-9));
    for &(_, from, _, t) in &observed {
        let row = trace
            .rows
            .iter()
            .find(|r| r.t == t)
            .expect("observed from the rows");
        if !setup.in_region(&Pose::from_vector(&row.x), from) {
            fidelity_errors.push(format!("t = {t}: system is not inside {from}"));
        }
    }
    let mut observed_run: Vec<(RegionId, f64)> = observed.iter().map(|o| (o.1, o.3)).collect();
    if complete {
        let last = trace.rows.last().expect("complete traces have rows");
        if !setup.in_region(&Pose::from_vector(&last.x), last.to) {
            fidelity_errors.push(format!("t = {}: system is not inside {}", last.t, last.to));
        }
        observed_run.push((last.to, last.t));
    }

    let satisfied = behaviour(&observed_run, complete, plan, setup)
        .map(|w| accepts(&w, &setup.formula))
        .unwrap_or(false);
    let saturated = max_control_norm > setup.scenario.saturation;
    let ok = satisfied
        && complete
        && fidelity_errors.is_empty()
        && containment_violation_count == 0
        && tube_violation_count == 0
        && envelope_violation_count == 0
        && non_finite_rows == 0
        && !saturated;
    Report {
        version: REPORT_FORMAT_VERSION,
        ok,
        satisfied,
        complete,
        observed_run,
        fidelity_errors,
        max_entry_offset,
        containment_violation_count,
        containment_violations,
        tube_violation_count,
        envelope_violation_count,
        segments,
        max_control_norm,
        saturation_threshold: setup.scenario.saturation,
        saturated,
        non_finite_rows,
        max_load_sharing_error,
    }
}

/// The timed behaviour of the logged run: the observed region sequence,
/// continued by the plan's loop when the run is complete and by staying put
/// otherwise.
fn behaviour(
    run: &[(RegionId, f64)],
    complete: bool,
    plan: &Plan,
    setup: &Setup,
) -> Option<TimedWord> {
    let wts = &setup.wts;
    let label = |r: RegionId| -> Option<Symbol> { wts.labels(r).ok().cloned() };
    let prefix = run
        .iter()
        .map(|&(r, t)| Some((label(r)?, t)))
        .collect::<Option<Vec<_>>>()?;
    let cycle = if complete {
        let mut cycle = plan.timed_word(wts).ok()?.cycle().to_vec();
        cycle.rotate_left(1);
        cycle
    } else {
        let &(last, _) = run.last()?;
        vec![(label(last)?, wts.duration(last, last)?)]
    };
    TimedWord::new(prefix, cycle).ok()
}
