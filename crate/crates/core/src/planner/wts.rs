use std::collections::BTreeMap;

use crate::partition::{Labels, Partition, RegionId};

use super::PlannerError;

/// Weighted transition system over the regions of a partition: moves to
/// face-adjacent regions plus a self-loop, each with a duration.
#[derive(Debug, Clone, PartialEq)]
pub struct Wts {
    partition: Partition,
    default_duration: f64,
    overrides: BTreeMap<(RegionId, RegionId), f64>,
}

impl Wts {
    pub fn build(
        partition: Partition,
        default_duration: f64,
        overrides: BTreeMap<(RegionId, RegionId), f64>,
    ) -> Result<Self, PlannerError> {
        let positive = |d: f64| d > 0.0 && d.is_finite();
        if !positive(default_duration) {
            return Err(PlannerError::InvalidConfig(format!(
                "transition duration must be positive, got {default_duration}"
            )));
        }
        for (&(a, b), &d) in &overrides {
            if !positive(d) {
                return Err(PlannerError::InvalidConfig(format!(
                    "duration of {a} -> {b} must be positive, got {d}"
                )));
            }
            partition.region(a)?;
            partition.region(b)?;
            if a != b && !partition.are_adjacent(a, b) {
                return Err(PlannerError::InvalidConfig(format!(
                    "duration given for {a} -> {b}, which are not adjacent"
                )));
            }
        }
        Ok(Self {
            partition,
            default_duration,
            overrides,
        })
    }

    pub fn uniform(partition: Partition, duration: f64) -> Result<Self, PlannerError> {
        Self::build(partition, duration, BTreeMap::new())
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn states(&self) -> impl Iterator<Item = RegionId> + '_ {
        self.partition.ids()
    }

    pub fn labels(&self, r: RegionId) -> Result<&Labels, PlannerError> {
        Ok(self.partition.labels(r)?)
    }

    /// Duration of `a -> b`, or `None` if there is no such transition.
    pub fn duration(&self, a: RegionId, b: RegionId) -> Option<f64> {
        self.partition.region(a).ok()?;
        if a != b && !self.partition.are_adjacent(a, b) {
            return None;
        }
        Some(
            *self
                .overrides
                .get(&(a, b))
                .unwrap_or(&self.default_duration),
        )
    }

    /// Outgoing transitions: neighbours by ascending index, then the self-loop.
    pub fn successors(&self, r: RegionId) -> Result<Vec<(RegionId, f64)>, PlannerError> {
        let mut out: Vec<(RegionId, f64)> = self
            .partition
            .neighbors(r)?
            .into_iter()
            .map(|n| (n, self.duration(r, n).unwrap()))
            .collect();
        out.push((r, self.duration(r, r).unwrap()));
        Ok(out)
    }

    pub fn transition_count(&self) -> usize {
        self.states()
            .map(|r| self.successors(r).map(|s| s.len()).unwrap_or(0))
            .sum()
    }
}
