//! Solvers for the optimal entanglement distribution problem: a greedy
//! heuristic, an exact branch-and-bound over the integer multi-commodity
//! flow formulation, and the restricted (no inter-satellite link) variant
//! of the exact solver.

mod exact;
mod greedy;

pub use exact::{exact_solve, exact_solve_with, ExactOptions, SolveLimits};
#[doc(hidden)]
pub use exact::debug_root_gap;
pub use greedy::{bfs_path, greedy_solve};

use std::collections::{BTreeMap, BTreeSet};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use crate::logical_graph::{EntanglementPath, LogicalGraph};
use crate::requests::RequestBatch;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverKind {
    Greedy,
    Exact,
    RestrictedExact,
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolverKind::Greedy => write!(f, "greedy"),
            SolverKind::Exact => write!(f, "exact"),
            SolverKind::RestrictedExact => write!(f, "restricted-exact"),
        }
    }
}

/// Output of a solver run: which requests were served, along which paths,
/// and the reward they collected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub served: BTreeSet<usize>,
    pub paths: BTreeMap<usize, EntanglementPath>,
    pub total_reward: u64,
    pub solver: SolverKind,
    pub proven_optimal: bool,
    pub runtime_s: f64,
}

impl Solution {
    pub fn empty(solver: SolverKind) -> Self {
        Self {
            served: BTreeSet::new(),
            paths: BTreeMap::new(),
            total_reward: 0,
            solver,
            proven_optimal: false,
            runtime_s: 0.0,
        }
    }
}

/// Per-request directed unit flows, the raw shape of the exact formulation:
/// request `i` is served iff `i` is in `served`, and its type-`i` flow puts
/// one unit on each directed edge in `flows[i]`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FlowAssignment {
    pub served: BTreeSet<usize>,
    pub flows: BTreeMap<usize, BTreeSet<(usize, usize)>>,
}

impl FlowAssignment {
    pub fn from_paths(paths: &BTreeMap<usize, EntanglementPath>) -> Self {
        let mut fa = FlowAssignment::default();
        for (&i, path) in paths {
            fa.served.insert(i);
            fa.flows.insert(i, path.hops().collect());
        }
        fa
    }
}

/// Trace each served request's unit out-edges from its source to its
/// destination. Disconnected flow cycles of the same commodity are legal in
/// the formulation but useless, so they are dropped. A flow that violates
/// conservation on the walk is an internal-consistency error.
pub fn extract_paths(
    flows: &FlowAssignment,
    g: &LogicalGraph,
    batch: &RequestBatch,
) -> anyhow::Result<BTreeMap<usize, EntanglementPath>> {
    let mut paths = BTreeMap::new();
    for &i in &flows.served {
        let request = batch
            .requests
            .get(i)
            .with_context(|| format!("request {i} not in batch"))?;
        let src = g
            .vertex_of(request.src)
            .with_context(|| format!("request {i}: source not in graph"))?;
        let dst = g
            .vertex_of(request.dst)
            .with_context(|| format!("request {i}: destination not in graph"))?;
        let edges = flows
            .flows
            .get(&i)
            .with_context(|| format!("request {i} marked served but has no flow"))?;
        let mut out: BTreeMap<usize, usize> = BTreeMap::new();
        for &(u, v) in edges {
            if out.insert(u, v).is_some() {
                bail!("request {i}: vertex {u} has two outgoing flow units");
            }
        }
        let mut vertices = vec![src];
        let mut at = src;
        while at != dst {
            let &next = out
                .get(&at)
                .with_context(|| format!("request {i}: flow conservation violated at {at}"))?;
            if vertices.contains(&next) {
                bail!("request {i}: flow walk revisits vertex {next}");
            }
            vertices.push(next);
            at = next;
        }
        paths.insert(i, EntanglementPath::new(vertices, request.demand));
    }
    Ok(paths)
}

/// One verification failure, machine-readable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    ServedPathMissing { request: usize },
    UnknownRequest { request: usize },
    DemandMismatch { request: usize },
    EndpointMismatch { request: usize },
    PathNotSimple { request: usize },
    TooShort { request: usize },
    GroundTransit { request: usize, vertex: usize },
    MissingEdge { request: usize, u: usize, v: usize },
    Oversubscribed { request: usize },
    RewardMismatch { stated: u64, actual: u64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Replay every reservation of `sol` on a fresh copy of `g0` and confirm
/// the solution is feasible: paths are simple satellite-transit routes
/// matching their request's endpoints and demand, no edge or vertex budget
/// is oversubscribed, and the stated reward is the served-reward sum.
pub fn verify_solution(
    g0: &LogicalGraph,
    batch: &RequestBatch,
    sol: &Solution,
    allow_ground_transit: bool,
) -> VerifyReport {
    let mut report = VerifyReport::default();
    let mut residual = g0.clone();
    let mut actual_reward = 0u64;

    for &i in &sol.served {
        let request = match batch.requests.get(i) {
            Some(r) => r,
            None => {
                report.violations.push(Violation::UnknownRequest { request: i });
                continue;
            }
        };
        actual_reward += request.reward as u64;
        let path = match sol.paths.get(&i) {
            Some(p) => p,
            None => {
                report.violations.push(Violation::ServedPathMissing { request: i });
                continue;
            }
        };
        if path.demand != request.demand {
            report.violations.push(Violation::DemandMismatch { request: i });
        }
        if !path.is_simple() {
            report.violations.push(Violation::PathNotSimple { request: i });
            continue;
        }
        if path.vertices.len() < 3 {
            report.violations.push(Violation::TooShort { request: i });
        }
        let src = path.source();
        let dst = path.destination();
        let want_src = g0.vertex_of(request.src);
        let want_dst = g0.vertex_of(request.dst);
        if !(g0.is_ground(src)
            && g0.is_ground(dst)
            && want_src == Some(src)
            && want_dst == Some(dst))
        {
            report.violations.push(Violation::EndpointMismatch { request: i });
        }
        if !allow_ground_transit {
            for &v in &path.vertices[1..path.vertices.len().saturating_sub(1)] {
                if g0.is_ground(v) {
                    report
                        .violations
                        .push(Violation::GroundTransit { request: i, vertex: v });
                }
            }
        }
        for (u, v) in path.hops() {
            if residual.channels(u, v).is_none() {
                report.violations.push(Violation::MissingEdge { request: i, u, v });
            }
        }
        if residual.reserve_path(path).is_err() {
            report.violations.push(Violation::Oversubscribed { request: i });
        }
    }

    if actual_reward != sol.total_reward {
        report.violations.push(Violation::RewardMismatch {
            stated: sol.total_reward,
            actual: actual_reward,
        });
    }
    report
}

/// Vertex ids of a request's endpoints in the logical graph.
pub(crate) fn endpoint_vertices(
    g: &LogicalGraph,
    request: &crate::requests::Request,
) -> (usize, usize) {
    let src = g.vertex_of(request.src).expect("request source must be in the graph");
    let dst = g.vertex_of(request.dst).expect("request destination must be in the graph");
    assert!(
        g.is_ground(src) && g.is_ground(dst),
        "request endpoints must be ground vertices"
    );
    (src, dst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::NodeId;
    use crate::logical_graph::ResourceProfile;
    use crate::requests::Request;
    use crate::visibility::TimeWindow;

    fn diamond() -> LogicalGraph {
        // grounds 0, 1; satellites 2, 3, 4
        LogicalGraph::from_parts(
            vec![
                NodeId::ground(0),
                NodeId::ground(1),
                NodeId::satellite(0, 0),
                NodeId::satellite(0, 1),
                NodeId::satellite(0, 2),
            ],
            2,
            vec![ResourceProfile::uniform(10); 5],
            &[(0, 2, 5), (2, 1, 5), (0, 3, 5), (3, 4, 5), (4, 1, 5)],
            TimeWindow::new(0.0, 0.0),
        )
    }

    fn one_request_batch() -> RequestBatch {
        RequestBatch::new(
            vec![Request::new(NodeId::ground(0), NodeId::ground(1), 1, 1, 0)],
            TimeWindow::new(0.0, 0.0),
        )
    }

    #[test]
    fn extract_single_path_verbatim() {
        let g = diamond();
        let batch = one_request_batch();
        let mut flows = FlowAssignment::default();
        flows.served.insert(0);
        flows.flows.insert(0, [(0, 2), (2, 1)].into_iter().collect());
        let paths = extract_paths(&flows, &g, &batch).unwrap();
        assert_eq!(paths[&0].vertices, vec![0, 2, 1]);
    }

    #[test]
    fn extract_discards_disjoint_cycle() {
        let g = diamond();
        let batch = one_request_batch();
        let mut flows = FlowAssignment::default();
        flows.served.insert(0);
        // real path 0-2-1 plus a useless 3-cycle of the same commodity;
        // the cycle is unreachable from the walk and silently dropped
        flows.flows.insert(
            0,
            [(0, 2), (2, 1), (3, 4), (4, 3)].into_iter().collect(),
        );
        let err = extract_paths(&flows, &g, &batch);
        // (4,3) and (3,4) both present is fine for the walk; neither is reached
        let paths = err.unwrap();
        assert_eq!(paths[&0].vertices, vec![0, 2, 1]);
    }

    #[test]
    fn extract_rejects_broken_conservation() {
        let g = diamond();
        let batch = one_request_batch();
        let mut flows = FlowAssignment::default();
        flows.served.insert(0);
        flows.flows.insert(0, [(0, 2)].into_iter().collect());
        assert!(extract_paths(&flows, &g, &batch).is_err());
    }

    #[test]
    fn unserved_requests_are_absent() {
        let g = diamond();
        let batch = one_request_batch();
        let flows = FlowAssignment::default();
        let paths = extract_paths(&flows, &g, &batch).unwrap();
        assert!(paths.is_empty());
    }

    #[test]
    fn verify_flags_oversubscription_and_tampering() {
        let g = diamond();
        let batch = RequestBatch::new(
            vec![
                Request::new(NodeId::ground(0), NodeId::ground(1), 5, 1, 0),
                Request::new(NodeId::ground(0), NodeId::ground(1), 5, 1, 1),
            ],
            TimeWindow::new(0.0, 0.0),
        );
        // two paths jointly oversubscribe edge (0,2): 5 + 5 > 5 channels
        let mut sol = Solution::empty(SolverKind::Exact);
        sol.served.extend([0, 1]);
        sol.paths.insert(0, EntanglementPath::new(vec![0, 2, 1], 5));
        sol.paths.insert(1, EntanglementPath::new(vec![0, 2, 1], 5));
        sol.total_reward = 2;
        let report = verify_solution(&g, &batch, &sol, false);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::Oversubscribed { .. })));

        // tampered reward
        let mut sol2 = Solution::empty(SolverKind::Exact);
        sol2.served.insert(0);
        sol2.paths.insert(0, EntanglementPath::new(vec![0, 2, 1], 5));
        sol2.total_reward = 99;
        let report2 = verify_solution(&g, &batch, &sol2, false);
        assert!(report2
            .violations
            .iter()
            .any(|v| matches!(v, Violation::RewardMismatch { .. })));
    }

    #[test]
    fn verify_flags_ground_transit() {
        // ground 0 - sat 3 - ground 2 - sat 4 - ground 1 style transit
        let g = LogicalGraph::from_parts(
            vec![
                NodeId::ground(0),
                NodeId::ground(1),
                NodeId::ground(2),
                NodeId::satellite(0, 0),
                NodeId::satellite(0, 1),
            ],
            3,
            vec![ResourceProfile::uniform(10); 5],
            &[(0, 3, 5), (3, 2, 5), (2, 4, 5), (4, 1, 5)],
            TimeWindow::new(0.0, 0.0),
        );
        let batch = RequestBatch::new(
            vec![Request::new(NodeId::ground(0), NodeId::ground(1), 1, 1, 0)],
            TimeWindow::new(0.0, 0.0),
        );
        let mut sol = Solution::empty(SolverKind::Exact);
        sol.served.insert(0);
        sol.paths
            .insert(0, EntanglementPath::new(vec![0, 3, 2, 4, 1], 1));
        sol.total_reward = 1;
        assert!(!verify_solution(&g, &batch, &sol, false).is_ok());
        assert!(verify_solution(&g, &batch, &sol, true).is_ok());
    }
}
