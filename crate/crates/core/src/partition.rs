//! Single-layer grid of half-open box regions, numbered in serpentine order
//! and labelled with atomic propositions.
//!
//! With `nx` cells per row, row 0 is numbered 1..nx left to right, row 1
//! right to left, and so on, so consecutive indices are always neighbours.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::{euler_to_rotation, Pose, Vec3};

/// 1-based region index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegionId(pub usize);

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "π{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PartitionError {
    #[error("invalid partition: {0}")]
    InvalidConfig(String),
    #[error("no region {0}")]
    UnknownRegion(RegionId),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionConfig {
    /// Bound on the distance from the object centre to any point of the
    /// coupled system.
    pub l_hat: f64,
    /// Radius of the tracking tube around the desired position.
    pub l0: f64,
    pub nx: usize,
    pub ny: usize,
    /// Centre of region 1.
    pub origin: Vec3,
}

impl PartitionConfig {
    pub fn side(&self) -> f64 {
        2.0 * (self.l_hat + self.l0)
    }
}

pub type Labels = BTreeSet<String>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub id: RegionId,
    pub center: Vec3,
    pub labels: Labels,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    cfg: PartitionConfig,
    regions: Vec<Region>,
}

/// Axis-aligned box `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub lo: Vec3,
    pub hi: Vec3,
}

impl Cell {
    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|k| p[k] >= self.lo[k] && p[k] < self.hi[k])
    }

    /// Membership in the closed box, widened by `tol`.
    pub fn contains_closed(&self, p: &Vec3, tol: f64) -> bool {
        (0..3).all(|k| p[k] >= self.lo[k] - tol && p[k] <= self.hi[k] + tol)
    }

    /// Whether the closed ball `B(c, r)` fits in the closed box, up to `tol`.
    pub fn contains_ball(&self, c: &Vec3, r: f64, tol: f64) -> bool {
        (0..3).all(|k| c[k] - r >= self.lo[k] - tol && c[k] + r <= self.hi[k] + tol)
    }

    pub fn hull(&self, other: &Cell) -> Cell {
        Cell {
            lo: self.lo.inf(&other.lo),
            hi: self.hi.sup(&other.hi),
        }
    }

    pub fn volume(&self) -> f64 {
        (self.hi - self.lo).product()
    }
}

impl Partition {
    pub fn build(cfg: PartitionConfig) -> Result<Self, PartitionError> {
        let bad = |m: &str| Err(PartitionError::InvalidConfig(m.to_string()));
        if !(cfg.l_hat > 0.0 && cfg.l_hat.is_finite()) {
            return bad("l_hat must be positive");
        }
        if !(cfg.l0 > 0.0 && cfg.l0.is_finite()) {
            return bad("l0 must be positive");
        }
        if cfg.nx == 0 || cfg.ny == 0 {
            return bad("grid extents must be positive");
        }
        if !cfg.origin.iter().all(|c| c.is_finite()) {
            return bad("origin must be finite");
        }
        if (cfg.origin.z - (cfg.l_hat + cfg.l0)).abs() > 1e-9 {
            return bad("region centres must sit at height l_hat + l0");
        }
        let d = cfg.side();
        let mut regions = Vec::with_capacity(cfg.nx * cfg.ny);
        for j in 0..cfg.nx * cfg.ny {
            let (ix, iy) = grid_position(cfg.nx, j);
            regions.push(Region {
                id: RegionId(j + 1),
                center: cfg.origin + Vec3::new(ix as f64 * d, iy as f64 * d, 0.0),
                labels: Labels::new(),
            });
        }
        Ok(Self { cfg, regions })
    }

    pub fn with_labels<I, S>(mut self, labels: I) -> Result<Self, PartitionError>
    where
        I: IntoIterator<Item = (RegionId, Vec<S>)>,
        S: Into<String>,
    {
        for (id, props) in labels {
            let idx = self.index(id)?;
            self.regions[idx]
                .labels
                .extend(props.into_iter().map(Into::into));
        }
        Ok(self)
    }

    pub fn config(&self) -> &PartitionConfig {
        &self.cfg
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn ids(&self) -> impl Iterator<Item = RegionId> + '_ {
        self.regions.iter().map(|r| r.id)
    }

    fn index(&self, id: RegionId) -> Result<usize, PartitionError> {
        if id.0 >= 1 && id.0 <= self.regions.len() {
            Ok(id.0 - 1)
        } else {
            Err(PartitionError::UnknownRegion(id))
        }
    }

    pub fn region(&self, id: RegionId) -> Result<&Region, PartitionError> {
        Ok(&self.regions[self.index(id)?])
    }

    pub fn center(&self, id: RegionId) -> Result<Vec3, PartitionError> {
        Ok(self.region(id)?.center)
    }

    pub fn labels(&self, id: RegionId) -> Result<&Labels, PartitionError> {
        Ok(&self.region(id)?.labels)
    }

    pub fn labeling(&self) -> BTreeMap<RegionId, Labels> {
        self.regions
            .iter()
            .map(|r| (r.id, r.labels.clone()))
            .collect()
    }

    pub fn cell(&self, id: RegionId) -> Result<Cell, PartitionError> {
        let c = self.center(id)?;
        let h = Vec3::repeat(self.cfg.l_hat + self.cfg.l0);
        Ok(Cell {
            lo: c - h,
            hi: c + h,
        })
    }

    /// Bounding box of the whole workspace.
    pub fn workspace(&self) -> Cell {
        let h = Vec3::repeat(self.cfg.l_hat + self.cfg.l0);
        let d = self.cfg.side();
        let lo = self.cfg.origin - h;
        let hi = lo + Vec3::new(self.cfg.nx as f64 * d, self.cfg.ny as f64 * d, d);
        Cell { lo, hi }
    }

    pub fn region_of(&self, p: &Vec3) -> Option<RegionId> {
        let ws = self.workspace();
        if !ws.contains(p) {
            return None;
        }
        let d = self.cfg.side();
        let guess =
            |k: usize, n: usize| (((p[k] - ws.lo[k]) / d).floor().max(0.0) as usize).min(n - 1);
        let (gx, gy) = (guess(0, self.cfg.nx), guess(1, self.cfg.ny));
        // Rounding can put the guess one cell off near a face.
        for iy in gy.saturating_sub(1)..=(gy + 1).min(self.cfg.ny - 1) {
            for ix in gx.saturating_sub(1)..=(gx + 1).min(self.cfg.nx - 1) {
                let id = RegionId(region_index(self.cfg.nx, ix, iy) + 1);
                if self.cell(id).ok()?.contains(p) {
                    return Some(id);
                }
            }
        }
        None
    }

    /// Face-adjacent regions, in ascending index order.
    pub fn neighbors(&self, id: RegionId) -> Result<Vec<RegionId>, PartitionError> {
        let (ix, iy) = grid_position(self.cfg.nx, self.index(id)?);
        let (nx, ny) = (self.cfg.nx as isize, self.cfg.ny as isize);
        let mut out: Vec<RegionId> = [(-1, 0), (1, 0), (0, -1), (0, 1)]
            .into_iter()
            .map(|(dx, dy)| (ix as isize + dx, iy as isize + dy))
            .filter(|&(x, y)| x >= 0 && y >= 0 && x < nx && y < ny)
            .map(|(x, y)| RegionId(region_index(self.cfg.nx, x as usize, y as usize) + 1))
            .collect();
        out.sort();
        Ok(out)
    }

    pub fn are_adjacent(&self, a: RegionId, b: RegionId) -> bool {
        self.neighbors(a).map(|n| n.contains(&b)).unwrap_or(false)
    }

    /// Membership of the whole system: every body point lies in the region and
    /// the object centre is strictly closer than `l0` to the region centre.
    pub fn system_in_region(&self, p_o: &Vec3, body_points: &[Vec3], id: RegionId) -> bool {
        let (Ok(cell), Ok(c)) = (self.cell(id), self.center(id)) else {
            return false;
        };
        body_points.iter().all(|p| cell.contains(p)) && (p_o - c).norm() < self.cfg.l0
    }

    /// Closed hull of the cells of a transition; `from == to` gives the cell.
    pub fn transition_hull(&self, from: RegionId, to: RegionId) -> Result<Cell, PartitionError> {
        Ok(self.cell(from)?.hull(&self.cell(to)?))
    }
}

fn grid_position(nx: usize, j: usize) -> (usize, usize) {
    let iy = j / nx;
    let r = j % nx;
    let ix = if iy.is_multiple_of(2) { r } else { nx - 1 - r };
    (ix, iy)
}

fn region_index(nx: usize, ix: usize, iy: usize) -> usize {
    if iy.is_multiple_of(2) {
        iy * nx + ix
    } else {
        iy * nx + (nx - 1 - ix)
    }
}

/// Sampled points of the held rod: both ends, the middle and every grasp
/// point, in world coordinates.
pub fn body_points(x_o: &Pose, half_length: f64, grasps: &[Vec3]) -> Vec<Vec3> {
    let r = euler_to_rotation(x_o.eta);
    let axis = r * Vec3::new(half_length, 0.0, 0.0);
    let mut pts = vec![x_o.p - axis, x_o.p, x_o.p + axis];
    pts.extend(grasps.iter().map(|g| x_o.p + r * g));
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Partition {
        Partition::build(PartitionConfig {
            l_hat: 1.5,
            l0: 0.5,
            nx: 4,
            ny: 4,
            origin: Vec3::new(2.0, 2.0, 2.0),
        })
        .unwrap()
    }

    #[test]
    fn serpentine_numbering() {
        let p = grid();
        assert_eq!(p.len(), 16);
        assert_eq!(p.config().side(), 4.0);
        assert_eq!(p.center(RegionId(4)).unwrap(), Vec3::new(14.0, 2.0, 2.0));
        assert_eq!(p.center(RegionId(5)).unwrap(), Vec3::new(14.0, 6.0, 2.0));
        assert_eq!(p.center(RegionId(8)).unwrap(), Vec3::new(2.0, 6.0, 2.0));
        assert_eq!(p.center(RegionId(13)).unwrap(), Vec3::new(14.0, 14.0, 2.0));
    }

    #[test]
    fn membership_and_faces() {
        let p = grid();
        assert_eq!(p.region_of(&Vec3::new(2.0, 2.0, 2.0)), Some(RegionId(1)));
        assert_eq!(p.region_of(&Vec3::new(4.0, 2.0, 2.0)), Some(RegionId(2)));
        assert_eq!(
            p.region_of(&Vec3::new(4.0 - 1e-12, 2.0, 2.0)),
            Some(RegionId(1))
        );
        assert_eq!(p.region_of(&Vec3::new(16.0, 2.0, 2.0)), None);
        assert_eq!(p.region_of(&Vec3::new(2.0, 2.0, 4.0)), None);
        assert_eq!(p.region_of(&Vec3::new(2.0, 2.0, 0.0)), Some(RegionId(1)));
    }

    #[test]
    fn adjacency() {
        let p = grid();
        assert_eq!(
            p.neighbors(RegionId(1)).unwrap(),
            vec![RegionId(2), RegionId(8)]
        );
        assert_eq!(p.neighbors(RegionId(7)).unwrap().len(), 4);
        let one = Partition::build(PartitionConfig {
            nx: 1,
            ny: 1,
            ..p.config().clone()
        })
        .unwrap();
        assert!(one.neighbors(RegionId(1)).unwrap().is_empty());
    }

    #[test]
    fn strict_tube_membership() {
        let p = grid();
        let c = Vec3::new(2.0, 2.0, 2.0);
        assert!(p.system_in_region(&c, &[c], RegionId(1)));
        let edge = c + Vec3::new(0.5, 0.0, 0.0);
        assert!(!p.system_in_region(&edge, &[edge], RegionId(1)));
        let start = Vec3::new(1.6, 2.0, 0.44);
        assert!(!p.system_in_region(&start, &[start], RegionId(1)));
    }

    #[test]
    fn rejects_bad_config() {
        let mut cfg = grid().config().clone();
        cfg.l0 = 0.0;
        assert!(matches!(
            Partition::build(cfg.clone()),
            Err(PartitionError::InvalidConfig(_))
        ));
        cfg.l0 = 0.5;
        cfg.origin.z = 3.0;
        assert!(Partition::build(cfg).is_err());
    }
}
