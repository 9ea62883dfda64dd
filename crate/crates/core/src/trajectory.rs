//! Desired pose along one transition: a quintic time-scaled straight line
//! between region centres with a constant orientation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::{EulerAngles, Vec3, Vec6};
use crate::partition::{Partition, PartitionError, RegionId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrajectoryError {
    #[error("{from} and {to} are not adjacent")]
    NotAdjacent { from: RegionId, to: RegionId },
    #[error("transition duration {0} must be positive")]
    BadDuration(f64),
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

/// Desired position, velocity and acceleration at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Desired {
    pub x: Vec6,
    pub v: Vec6,
    pub a: Vec6,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionTrajectory {
    pub from: RegionId,
    pub to: RegionId,
    pub start: Vec3,
    pub end: Vec3,
    pub eta: EulerAngles,
    pub t0: f64,
    pub duration: f64,
}

/// Quintic `s(τ) = 10τ³ − 15τ⁴ + 6τ⁵` and its first two derivatives.
pub fn quintic(tau: f64) -> (f64, f64, f64) {
    let t = tau.clamp(0.0, 1.0);
    let (t2, t3) = (t * t, t * t * t);
    let s = t3 * (10.0 - 15.0 * t + 6.0 * t2);
    let ds = 30.0 * t2 * (1.0 - t) * (1.0 - t);
    let dds = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
    (s, ds, dds)
}

impl TransitionTrajectory {
    pub fn between(
        partition: &Partition,
        from: RegionId,
        to: RegionId,
        duration: f64,
        t0: f64,
        eta: EulerAngles,
    ) -> Result<Self, TrajectoryError> {
        if from != to && !partition.are_adjacent(from, to) {
            return Err(TrajectoryError::NotAdjacent { from, to });
        }
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(TrajectoryError::BadDuration(duration));
        }
        Ok(Self {
            from,
            to,
            start: partition.center(from)?,
            end: partition.center(to)?,
            eta,
            t0,
            duration,
        })
    }

    /// Holds the centre of `region` for `duration`.
    pub fn hold(
        partition: &Partition,
        region: RegionId,
        duration: f64,
        t0: f64,
        eta: EulerAngles,
    ) -> Result<Self, TrajectoryError> {
        Self::between(partition, region, region, duration, t0, eta)
    }

    pub fn is_hold(&self) -> bool {
        self.from == self.to
    }

    pub fn end_time(&self) -> f64 {
        self.t0 + self.duration
    }

    pub fn eval(&self, t: f64) -> Desired {
        let (s, ds, dds) = quintic((t - self.t0) / self.duration);
        let delta = self.end - self.start;
        let p = self.start + delta * s;
        let e = self.eta.to_vector();
        let mut x = Vec6::zeros();
        x.fixed_rows_mut::<3>(0).copy_from(&p);
        x.fixed_rows_mut::<3>(3).copy_from(&e);
        let mut v = Vec6::zeros();
        let mut a = Vec6::zeros();
        if (0.0..=1.0).contains(&((t - self.t0) / self.duration)) {
            v.fixed_rows_mut::<3>(0)
                .copy_from(&(delta * (ds / self.duration)));
            a.fixed_rows_mut::<3>(0)
                .copy_from(&(delta * (dds / (self.duration * self.duration))));
        }
        Desired { x, v, a }
    }

    pub fn position(&self, t: f64) -> Vec3 {
        self.eval(t).x.fixed_rows::<3>(0).into_owned()
    }
}
