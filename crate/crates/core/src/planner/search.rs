//! Breadth-first search of the product of the transition system with the
//! formula's progression states.
//!
//! A product state `(r, ψ)` means "the run is in `r` and `ψ` must hold from
//! here". In the supported fragment every obligation is resolved to a
//! constant within bounded time, so a violation always shows up as `false`
//! after finitely many steps; any cycle that avoids `false` therefore
//! generates an accepting run.

use std::collections::{HashMap, VecDeque};

use mitl::Formula;
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::partition::RegionId;

use super::progression::{fragment_violation, progress, Obligation};
use super::{validate_plan, Plan, PlannerError, Wts};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    pub max_states: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        Self {
            max_states: 500_000,
        }
    }
}

struct Product {
    nodes: Vec<(RegionId, usize)>,
    edges: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
}

fn explore(
    wts: &Wts,
    root: Obligation,
    initial: RegionId,
    limits: SearchLimits,
) -> Result<Product, PlannerError> {
    let mut obligations: Vec<Obligation> = vec![root.clone()];
    let mut ob_index: HashMap<Obligation, usize> = HashMap::from([(root, 0)]);
    let mut node_index: HashMap<(RegionId, usize), usize> = HashMap::from([((initial, 0), 0)]);
    let mut p = Product {
        nodes: vec![(initial, 0)],
        edges: vec![Vec::new()],
        parent: vec![None],
        depth: vec![0],
    };
    let mut queue = VecDeque::from([0usize]);
    while let Some(n) = queue.pop_front() {
        let (r, ob) = p.nodes[n];
        let sigma = wts.labels(r)?.clone();
        for (next, delta) in wts.successors(r)? {
            let residual = progress(&obligations[ob], &sigma, delta);
            if residual == Obligation::False {
                continue;
            }
            let ob_id = match ob_index.get(&residual) {
                Some(&id) => id,
                None => {
                    obligations.push(residual.clone());
                    ob_index.insert(residual, obligations.len() - 1);
                    obligations.len() - 1
                }
            };
            let m = match node_index.get(&(next, ob_id)) {
                Some(&m) => m,
                None => {
                    if p.nodes.len() >= limits.max_states {
                        return Err(PlannerError::StateSpaceExceeded {
                            limit: limits.max_states,
                        });
                    }
                    let m = p.nodes.len();
                    node_index.insert((next, ob_id), m);
                    p.nodes.push((next, ob_id));
                    p.edges.push(Vec::new());
                    p.parent.push(Some(n));
                    p.depth.push(p.depth[n] + 1);
                    queue.push_back(m);
                    m
                }
            };
            p.edges[n].push(m);
        }
    }
    Ok(p)
}

/// Shortest path from `start` back to itself, as the nodes after `start`.
fn shortest_cycle(p: &Product, start: usize) -> Option<Vec<usize>> {
    let mut parent: HashMap<usize, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    for &m in &p.edges[start] {
        if m == start {
            return Some(vec![start]);
        }
        if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(m) {
            e.insert(start);
            queue.push_back(m);
        }
    }
    while let Some(n) = queue.pop_front() {
        for &m in &p.edges[n] {
            if m == start {
                let mut path = vec![n];
                let mut k = n;
                while let Some(&q) = parent.get(&k) {
                    if q == start {
                        break;
                    }
                    path.push(q);
                    k = q;
                }
                path.push(start);
                path.reverse();
                return Some(path);
            }
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(m) {
                e.insert(n);
                queue.push_back(m);
            }
        }
    }
    None
}

/// Finds a lasso run from `initial` whose timed word satisfies `phi`:
/// shortest prefix first, then shortest loop, then lowest region indices.
/// `Ok(None)` when no such run exists.
pub fn find_accepting_run(
    wts: &Wts,
    phi: &Formula,
    initial: RegionId,
) -> Result<Option<Plan>, PlannerError> {
    find_accepting_run_with(wts, phi, initial, SearchLimits::default())
}

pub fn find_accepting_run_with(
    wts: &Wts,
    phi: &Formula,
    initial: RegionId,
    limits: SearchLimits,
) -> Result<Option<Plan>, PlannerError> {
    if let Some(why) = fragment_violation(phi) {
        return Err(PlannerError::UnsupportedFragment(why));
    }
    wts.partition().region(initial)?;
    let root = Obligation::from(phi);
    if root == Obligation::False {
        return Ok(None);
    }
    let p = explore(wts, root, initial, limits)?;

    let mut graph = DiGraph::<(), ()>::with_capacity(p.nodes.len(), 0);
    for _ in &p.nodes {
        graph.add_node(());
    }
    for (n, out) in p.edges.iter().enumerate() {
        for &m in out {
            graph.add_edge(NodeIndex::new(n), NodeIndex::new(m), ());
        }
    }
    let mut on_cycle = vec![false; p.nodes.len()];
    for scc in tarjan_scc(&graph) {
        let cyclic = scc.len() > 1 || p.edges[scc[0].index()].contains(&scc[0].index());
        if cyclic {
            for n in scc {
                on_cycle[n.index()] = true;
            }
        }
    }
    let Some(min_depth) = (0..p.nodes.len())
        .filter(|&n| on_cycle[n])
        .map(|n| p.depth[n])
        .min()
    else {
        return Ok(None);
    };
    let (target, cycle) = (0..p.nodes.len())
        .filter(|&n| on_cycle[n] && p.depth[n] == min_depth)
        .filter_map(|n| shortest_cycle(&p, n).map(|c| (n, c)))
        .min_by_key(|(n, c)| (c.len(), *n))
        .expect("a node on a cycle has a cycle");

    let mut prefix = vec![target];
    let mut k = target;
    while let Some(q) = p.parent[k] {
        prefix.push(q);
        k = q;
    }
    prefix.reverse();
    let loop_start = prefix.len() - 1;
    let regions: Vec<RegionId> = prefix
        .iter()
        .chain(cycle[1..].iter())
        .map(|&n| p.nodes[n].0)
        .collect();
    let plan = Plan::from_regions(wts, &regions, loop_start)?;
    if !validate_plan(&plan, wts, phi) {
        return Err(PlannerError::SelfCheckFailed);
    }
    Ok(Some(plan))
}
