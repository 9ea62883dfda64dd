#![allow(dead_code)]

use coopmitl::executive::{Scenario, Setup};
use coopmitl::kinematics::{EulerAngles, Pose, Vec3, Vec6};
use coopmitl::partition::{Partition, PartitionConfig, RegionId};
use coopmitl::planner::{validate_plan, Plan, Wts};
use mitl::{Formula, Interval};
use rand::Rng;

pub fn random_angles(rng: &mut impl Rng) -> EulerAngles {
    EulerAngles::new(
        rng.random_range(-3.0..3.0),
        rng.random_range(-1.3..1.3),
        rng.random_range(-3.0..3.0),
    )
}

pub fn random_pose(rng: &mut impl Rng) -> Pose {
    let p = Vec3::from_fn(|_, _| rng.random_range(-3.0..3.0));
    Pose::new(p, random_angles(rng))
}

pub fn random_vec6(rng: &mut impl Rng, scale: f64) -> Vec6 {
    Vec6::from_fn(|_, _| rng.random_range(-scale..scale))
}

pub fn transport_setup() -> Setup {
    Setup::new(Scenario::transport()).expect("built-in scenario is valid")
}

/// The detour run, followed by holding the last region.
pub fn detour_plan(setup: &Setup) -> Plan {
    let regions: Vec<RegionId> = [1, 2, 3, 4, 5, 12, 13, 14, 11, 12, 5]
        .map(RegionId)
        .to_vec();
    Plan::from_regions(&setup.wts, &regions, regions.len() - 1).unwrap()
}

pub const ATOMS: [&str; 3] = ["a", "b", "c"];

pub fn grid(nx: usize, ny: usize) -> Partition {
    Partition::build(PartitionConfig {
        l_hat: 1.5,
        l0: 0.5,
        nx,
        ny,
        origin: Vec3::new(2.0, 2.0, 2.0),
    })
    .expect("valid grid")
}

pub fn random_labelling(rng: &mut impl Rng, p: Partition) -> Partition {
    let labels: Vec<(RegionId, Vec<&str>)> = p
        .ids()
        .map(|r| {
            (
                r,
                ATOMS
                    .iter()
                    .copied()
                    .filter(|_| rng.random_bool(0.3))
                    .collect(),
            )
        })
        .collect();
    p.with_labels(labels).expect("ids come from the partition")
}

fn random_state_formula(rng: &mut impl Rng, depth: usize) -> Formula {
    let atom = Formula::atom(ATOMS[rng.random_range(0..ATOMS.len())]);
    if depth == 0 {
        return atom;
    }
    match rng.random_range(0..4) {
        0 => atom,
        1 => Formula::not(random_state_formula(rng, depth - 1)),
        2 => Formula::and(
            random_state_formula(rng, depth - 1),
            random_state_formula(rng, depth - 1),
        ),
        _ => Formula::or(
            random_state_formula(rng, depth - 1),
            random_state_formula(rng, depth - 1),
        ),
    }
}

/// Random formula whose truth depends only on positions within `budget`
/// time units: integer interval bounds whose nested upper bounds add up to
/// at most `budget`.
pub fn random_bounded_formula(rng: &mut impl Rng, budget: u32, depth: usize) -> Formula {
    if depth == 0 || rng.random_bool(0.25) {
        return random_state_formula(rng, 1);
    }
    let temporal = budget > 0 && rng.random_bool(0.6);
    if !temporal {
        return match rng.random_range(0..3) {
            0 => Formula::not(random_bounded_formula(rng, budget, depth - 1)),
            1 => Formula::and(
                random_bounded_formula(rng, budget, depth - 1),
                random_bounded_formula(rng, budget, depth - 1),
            ),
            _ => Formula::or(
                random_bounded_formula(rng, budget, depth - 1),
                random_bounded_formula(rng, budget, depth - 1),
            ),
        };
    }
    let hi = rng.random_range(1..=budget);
    let lo = rng.random_range(0..hi);
    let i = Interval::new(
        lo as f64,
        rng.random_bool(0.7),
        hi as f64,
        rng.random_bool(0.7),
    )
    .expect("lo < hi");
    let rest = budget - hi;
    match rng.random_range(0..4) {
        0 => Formula::next(i, random_bounded_formula(rng, rest, depth - 1)),
        1 => Formula::eventually(i, random_bounded_formula(rng, rest, depth - 1)),
        2 => Formula::always(i, random_bounded_formula(rng, rest, depth - 1)),
        _ => Formula::until(
            i,
            random_bounded_formula(rng, rest, depth - 1),
            random_bounded_formula(rng, rest, depth - 1),
        ),
    }
}

/// A horizon-bounded formula, sometimes conjoined with a global state
/// invariant.
pub fn random_mission(rng: &mut impl Rng, horizon: u32) -> Formula {
    let bounded = random_bounded_formula(rng, horizon, 3);
    if rng.random_bool(0.5) {
        Formula::and(
            Formula::always(Interval::unrestricted(), random_state_formula(rng, 1)),
            bounded,
        )
    } else {
        bounded
    }
}

/// Whether some run satisfies `phi`, by trying every path of `steps`
/// transitions from `initial` and then staying put.
pub fn satisfiable_by_enumeration(
    wts: &Wts,
    phi: &Formula,
    initial: RegionId,
    steps: usize,
) -> bool {
    fn extend(wts: &Wts, phi: &Formula, path: &mut Vec<RegionId>, steps: usize) -> bool {
        if path.len() == steps + 1 {
            let plan = Plan::from_regions(wts, path, steps).expect("paths follow transitions");
            return validate_plan(&plan, wts, phi);
        }
        let last = *path.last().expect("non-empty");
        for (next, _) in wts.successors(last).expect("known region") {
            path.push(next);
            let found = extend(wts, phi, path, steps);
            path.pop();
            if found {
                return true;
            }
        }
        false
    }
    extend(wts, phi, &mut vec![initial], steps)
}
