//! Utility-interval routing with link deactivation.
//!
//! Every flow is routed over one of its `k` shortest candidate paths under a
//! utility interval `(umin, umax)`. The selection rule is deterministic:
//! flows are processed in descending rate (ties by `(src, dst)` node index);
//! a path is feasible when every link stays at or below `umax` after the
//! assignment; among feasible paths the rule prefers (1) fewest
//! newly-activated links, (2) most links landing inside `[umin, umax]`,
//! (3) fewest hops, (4) lexicographically smallest node sequence. When no
//! path is feasible the flow takes the path minimizing the maximum
//! post-assignment utility and is flagged as overloaded. Links that end the
//! run with zero utility are switched off; energy saving is the switched-off
//! fraction of directed links.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::netmodel::Topology;
use crate::traffic::{Flow, TrafficSnapshot};

#[derive(Debug, Error)]
pub enum RouteError {
    #[error("no candidate path for flow {src} -> {dst} with positive rate")]
    Unroutable { src: String, dst: String },
    #[error("utility interval ({umin}, {umax}) violates 0 <= umin <= umax <= 100")]
    BadInterval { umin: f64, umax: f64 },
}

/// Lower/upper link-utility thresholds in percent, `0 <= umin <= umax <= 100`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityInterval {
    pub umin: f64,
    pub umax: f64,
}

impl UtilityInterval {
    pub fn new(umin: f64, umax: f64) -> Result<Self, RouteError> {
        if !(0.0 <= umin && umin <= umax && umax <= 100.0) {
            return Err(RouteError::BadInterval { umin, umax });
        }
        Ok(UtilityInterval { umin, umax })
    }
}

/// Result of routing one snapshot: per-link utilities (percent, indexed like
/// `Topology::links`), the chosen node sequence per flow, the switched-off
/// link set, and the two summary metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingOutcome {
    pub utilities: Vec<f64>,
    pub paths: BTreeMap<(usize, usize), Vec<usize>>,
    pub inactive_links: BTreeSet<usize>,
    pub energy_saving: f64,
    pub avg_path_length: f64,
    /// Flows that could not be placed within `umax` (overload allowed).
    pub overloaded: Vec<(usize, usize)>,
}

/// Up to `k` loop-free paths from `src` to `dst` over active links, in
/// nondecreasing hop count, ties by lexicographic node-index sequence.
pub fn candidate_paths(t: &Topology, src: usize, dst: usize, k: usize) -> Vec<Vec<usize>> {
    assert!(src != dst, "src and dst must differ");
    assert!(k >= 1, "k must be >= 1");
    let adj = t.adjacency();
    let mut out = Vec::new();
    // Best-first over partial simple paths keyed by (length, sequence):
    // completed paths pop in exactly the required order.
    let mut heap: BinaryHeap<Reverse<(usize, Vec<usize>)>> = BinaryHeap::new();
    heap.push(Reverse((1, vec![src])));
    while let Some(Reverse((_, path))) = heap.pop() {
        let last = *path.last().unwrap();
        if last == dst {
            out.push(path);
            if out.len() == k {
                break;
            }
            continue;
        }
        for &(next, _link) in &adj[last] {
            if !path.contains(&next) {
                let mut p = path.clone();
                p.push(next);
                heap.push(Reverse((p.len(), p)));
            }
        }
    }
    out
}

/// Precomputed routing state for one `(topology, snapshot, k)` triple:
/// flows in processing order with their candidate paths resolved to link
/// indices. Candidate enumeration is independent of the utility interval, so
/// a plan can be routed repeatedly at different `(umin, umax)` points.
#[derive(Debug, Clone)]
pub struct RoutePlan {
    link_count: usize,
    capacities: Vec<f64>,
    flows: Vec<PlannedFlow>,
}

#[derive(Debug, Clone)]
struct PlannedFlow {
    src: usize,
    dst: usize,
    rate: f64,
    candidates: Vec<CandidatePath>,
}

#[derive(Debug, Clone)]
struct CandidatePath {
    nodes: Vec<usize>,
    links: Vec<usize>,
}

/// Processing order: descending rate, ties by (src, dst) node index.
pub(crate) fn routing_order(flows: &[Flow]) -> Vec<&Flow> {
    let mut ordered: Vec<&Flow> = flows.iter().collect();
    ordered.sort_by(|a, b| {
        b.rate
            .total_cmp(&a.rate)
            .then(a.src.cmp(&b.src))
            .then(a.dst.cmp(&b.dst))
    });
    ordered
}

impl RoutePlan {
    pub fn prepare(
        t: &Topology,
        s: &TrafficSnapshot,
        k: usize,
    ) -> Result<Self, RouteError> {
        let mut flows = Vec::with_capacity(s.flows().len());
        for flow in routing_order(s.flows()) {
            let paths = candidate_paths(t, flow.src, flow.dst, k);
            if paths.is_empty() && flow.rate > 0.0 {
                return Err(RouteError::Unroutable {
                    src: t.node_name(flow.src).to_string(),
                    dst: t.node_name(flow.dst).to_string(),
                });
            }
            let candidates = paths
                .into_iter()
                .map(|nodes| {
                    let links = nodes
                        .windows(2)
                        .map(|w| t.link_between(w[0], w[1]).expect("path uses topology links"))
                        .collect();
                    CandidatePath { nodes, links }
                })
                .collect();
            flows.push(PlannedFlow {
                src: flow.src,
                dst: flow.dst,
                rate: flow.rate,
                candidates,
            });
        }
        Ok(RoutePlan {
            link_count: t.links().len(),
            capacities: t.links().iter().map(|l| l.capacity).collect(),
            flows,
        })
    }

    /// Routes the planned flows at the given interval. Pure: identical
    /// inputs produce identical outcomes.
    pub fn route(&self, u: UtilityInterval) -> RoutingOutcome {
        let mut loads = vec![0.0f64; self.link_count];
        let mut paths = BTreeMap::new();
        let mut overloaded = Vec::new();
        let mut routed_hops: Vec<usize> = Vec::new();

        for flow in &self.flows {
            if flow.candidates.is_empty() {
                continue; // zero-rate flow on a disconnected pair
            }
            let post_util =
                |loads: &[f64], li: usize| 100.0 * (loads[li] + flow.rate) / self.capacities[li];

            let chosen = flow
                .candidates
                .iter()
                .enumerate()
                .filter(|(_, cand)| {
                    cand.links.iter().all(|&li| post_util(&loads, li) <= u.umax)
                })
                .min_by_key(|(_, cand)| {
                    let newly_active =
                        cand.links.iter().filter(|&&li| loads[li] == 0.0).count();
                    let well_utilized = cand
                        .links
                        .iter()
                        .filter(|&&li| {
                            let p = post_util(&loads, li);
                            u.umin <= p && p <= u.umax
                        })
                        .count();
                    (
                        newly_active,
                        Reverse(well_utilized),
                        cand.nodes.len() - 1,
                        cand.nodes.clone(),
                    )
                })
                .map(|(ci, _)| ci);

            let ci = match chosen {
                Some(ci) => ci,
                None => {
                    // Overload: minimize the maximum post-assignment utility,
                    // ties by fewest hops then lexicographic sequence.
                    let ci = flow
                        .candidates
                        .iter()
                        .enumerate()
                        .min_by(|(_, a), (_, b)| {
                            let ma = a
                                .links
                                .iter()
                                .map(|&li| post_util(&loads, li))
                                .fold(0.0f64, f64::max);
                            let mb = b
                                .links
                                .iter()
                                .map(|&li| post_util(&loads, li))
                                .fold(0.0f64, f64::max);
                            ma.total_cmp(&mb)
                                .then(a.nodes.len().cmp(&b.nodes.len()))
                                .then(a.nodes.cmp(&b.nodes))
                        })
                        .map(|(ci, _)| ci)
                        .unwrap();
                    overloaded.push((flow.src, flow.dst));
                    ci
                }
            };

            let cand = &flow.candidates[ci];
            for &li in &cand.links {
                loads[li] += flow.rate;
            }
            routed_hops.push(cand.nodes.len() - 1);
            paths.insert((flow.src, flow.dst), cand.nodes.clone());
        }

        let utilities: Vec<f64> = loads
            .iter()
            .zip(&self.capacities)
            .map(|(load, cap)| 100.0 * load / cap)
            .collect();
        let inactive_links: BTreeSet<usize> = utilities
            .iter()
            .enumerate()
            .filter(|(_, u)| **u == 0.0)
            .map(|(i, _)| i)
            .collect();
        let energy_saving = if self.link_count == 0 {
            0.0
        } else {
            100.0 * inactive_links.len() as f64 / self.link_count as f64
        };
        let avg_path_length = if routed_hops.is_empty() {
            0.0
        } else {
            routed_hops.iter().sum::<usize>() as f64 / routed_hops.len() as f64
        };

        RoutingOutcome {
            utilities,
            paths,
            inactive_links,
            energy_saving,
            avg_path_length,
            overloaded,
        }
    }
}

/// Routes every flow of `s` over `t` under interval `u` with `k` candidate
/// paths per flow, accumulating link utilities and switching idle links off.
pub fn route_snapshot(
    t: &Topology,
    s: &TrafficSnapshot,
    u: UtilityInterval,
    k: usize,
) -> Result<RoutingOutcome, RouteError> {
    Ok(RoutePlan::prepare(t, s, k)?.route(u))
}

/// Switched-off fraction of directed links, in percent.
pub fn energy_saving(o: &RoutingOutcome, t: &Topology) -> f64 {
    if t.links().is_empty() {
        return 0.0;
    }
    100.0 * o.inactive_links.len() as f64 / t.links().len() as f64
}

/// Mean hop count over routed flows; 0 when nothing was routed.
pub fn average_path_length(o: &RoutingOutcome) -> f64 {
    if o.paths.is_empty() {
        return 0.0;
    }
    let hops: usize = o.paths.values().map(|p| p.len() - 1).sum();
    hops as f64 / o.paths.len() as f64
}

impl RoutingOutcome {
    /// Recomputes per-link utilities from the recorded paths, accumulating
    /// flows in the same canonical order the router used. Reproduces
    /// `self.utilities` bit for bit.
    pub fn recompute_utilities(&self, t: &Topology, s: &TrafficSnapshot) -> Vec<f64> {
        let mut loads = vec![0.0f64; t.links().len()];
        for flow in routing_order(s.flows()) {
            if let Some(path) = self.paths.get(&(flow.src, flow.dst)) {
                for w in path.windows(2) {
                    let li = t.link_between(w[0], w[1]).expect("path uses topology links");
                    loads[li] += flow.rate;
                }
            }
        }
        loads
            .iter()
            .zip(t.links())
            .map(|(load, link)| 100.0 * load / link.capacity)
            .collect()
    }

    /// CSV export: one `link` row per directed link plus a `summary` row.
    pub fn to_csv(&self, t: &Topology) -> String {
        let mut out = String::from("type,src,dst,utility,active,energy_saving,avg_path_length\n");
        for (li, link) in t.links().iter().enumerate() {
            let _ = writeln!(
                out,
                "link,{},{},{:.4},{},,",
                t.node_name(link.src),
                t.node_name(link.dst),
                self.utilities[li],
                if self.inactive_links.contains(&li) { 0 } else { 1 },
            );
        }
        let _ = writeln!(
            out,
            "summary,,,,,{:.4},{:.4}",
            self.energy_saving, self.avg_path_length
        );
        out
    }
}
