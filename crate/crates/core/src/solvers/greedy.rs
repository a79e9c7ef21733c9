//! Greedy solver: serve requests in non-increasing reward/demand order,
//! routing each over a minimum-hop feasible path and reserving resources as
//! it goes.

use std::collections::VecDeque;
use std::time::Instant;

use crate::logical_graph::{EntanglementPath, LogicalGraph};
use crate::requests::RequestBatch;

use super::{endpoint_vertices, verify_solution, Solution, SolverKind};

/// Search restrictions shared by the greedy BFS and the exact solver's path
/// generation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PathRules {
    pub allow_isl: bool,
    pub allow_ground_transit: bool,
}

impl Default for PathRules {
    fn default() -> Self {
        Self {
            allow_isl: true,
            allow_ground_transit: false,
        }
    }
}

/// Can `v` act as an intermediate hop for demand `d`?
#[inline]
fn intermediate_ok(g: &LogicalGraph, v: usize, d: u32, rules: &PathRules) -> bool {
    if g.is_ground(v) && !rules.allow_ground_transit {
        return false;
    }
    let r = g.resources(v);
    r.transmitters >= d && r.receivers >= d && r.memories >= 2 * d
}

#[inline]
fn edge_allowed(g: &LogicalGraph, u: usize, v: usize, rules: &PathRules) -> bool {
    rules.allow_isl || g.is_ground(u) || g.is_ground(v)
}

/// Breadth-first search for a minimum-hop path from the end of `prefix` to
/// `t` that can carry demand `d` on the residual graph. Vertices of the
/// prefix are off limits (paths stay simple) and `banned_first` vertices may
/// not be the first hop out of the prefix end; both hooks exist for the
/// exact solver's path-space partitioning. Neighbor expansion is in
/// ascending vertex order, so the result is deterministic.
///
/// Returns the full path (prefix included) or `None`.
pub(crate) fn bfs_extend(
    g: &LogicalGraph,
    prefix: &[usize],
    t: usize,
    d: u32,
    rules: &PathRules,
    banned_first: &[usize],
) -> Option<Vec<usize>> {
    debug_assert!(!prefix.is_empty());
    let start = *prefix.last().unwrap();
    debug_assert!(start != t);

    // source role when the prefix is just the source, intermediate otherwise
    if prefix.len() == 1 {
        let r = g.resources(start);
        if r.transmitters < d || r.memories < d {
            return None;
        }
    }
    let rt = g.resources(t);
    if rt.receivers < d || rt.memories < d {
        return None;
    }

    let n = g.vertex_count();
    let mut visited = vec![false; n];
    for &v in prefix {
        visited[v] = true;
    }
    let mut parent: Vec<usize> = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    queue.push_back(start);

    while let Some(u) = queue.pop_front() {
        for (v, channels) in g.neighbors(u) {
            if visited[v] || channels < d || !edge_allowed(g, u, v, rules) {
                continue;
            }
            if u == start && banned_first.contains(&v) {
                continue;
            }
            if v == t {
                let mut path = prefix.to_vec();
                let mut tail = vec![t];
                let mut at = u;
                while at != start {
                    tail.push(at);
                    at = parent[at];
                }
                path.extend(tail.into_iter().rev());
                return Some(path);
            }
            if !intermediate_ok(g, v, d, rules) {
                continue;
            }
            visited[v] = true;
            parent[v] = u;
            queue.push_back(v);
        }
    }
    None
}

/// Minimum-hop feasible path between two ground vertices for demand `d`,
/// with intermediates restricted to satellites unless `allow_ground_transit`.
pub fn bfs_path(
    g: &LogicalGraph,
    s: usize,
    t: usize,
    d: u32,
    allow_ground_transit: bool,
) -> Option<EntanglementPath> {
    assert!(s != t, "source and destination must differ");
    assert!(g.is_ground(s) && g.is_ground(t), "endpoints must be ground vertices");
    let rules = PathRules {
        allow_isl: true,
        allow_ground_transit,
    };
    bfs_extend(g, &[s], t, d, &rules, &[]).map(|vertices| EntanglementPath::new(vertices, d))
}

/// Request indices in non-increasing reward/demand order, ties broken by
/// ascending batch index. The ratio comparison is exact (cross products).
pub(crate) fn ratio_order(batch: &RequestBatch) -> Vec<usize> {
    let mut order: Vec<usize> = (0..batch.requests.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = &batch.requests[a];
        let rb = &batch.requests[b];
        let lhs = ra.reward as u64 * rb.demand as u64;
        let rhs = rb.reward as u64 * ra.demand as u64;
        rhs.cmp(&lhs).then(a.cmp(&b))
    });
    order
}

pub(crate) fn greedy_with_rules(g: &LogicalGraph, batch: &RequestBatch, rules: &PathRules) -> Solution {
    let start = Instant::now();
    let mut residual = g.clone();
    let mut sol = Solution::empty(SolverKind::Greedy);
    for i in ratio_order(batch) {
        let request = &batch.requests[i];
        let (s, t) = endpoint_vertices(g, request);
        if let Some(vertices) = bfs_extend(&residual, &[s], t, request.demand, rules, &[]) {
            let path = EntanglementPath::new(vertices, request.demand);
            residual.reserve_path(&path).expect("BFS result must be reservable");
            sol.served.insert(i);
            sol.paths.insert(i, path);
            sol.total_reward += request.reward as u64;
        }
    }
    sol.runtime_s = start.elapsed().as_secs_f64();
    sol
}

/// Greedy OED: requests in non-increasing reward/demand order, each routed
/// over a minimum-hop BFS path on the residual graph. Never claims
/// optimality.
pub fn greedy_solve(g: &LogicalGraph, batch: &RequestBatch) -> Solution {
    let sol = greedy_with_rules(g, batch, &PathRules::default());
    let report = verify_solution(g, batch, &sol, false);
    assert!(report.is_ok(), "greedy produced an invalid solution: {:?}", report.violations);
    sol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::NodeId;
    use crate::logical_graph::ResourceProfile;
    use crate::requests::Request;
    use crate::visibility::TimeWindow;

    fn w0() -> TimeWindow {
        TimeWindow::new(0.0, 0.0)
    }

    #[test]
    fn single_request_over_one_satellite() {
        let g = LogicalGraph::from_parts(
            vec![NodeId::ground(0), NodeId::ground(1), NodeId::satellite(0, 0)],
            2,
            vec![ResourceProfile::uniform(10); 3],
            &[(0, 2, 3), (2, 1, 3)],
            w0(),
        );
        let batch = RequestBatch::new(
            vec![Request::new(NodeId::ground(0), NodeId::ground(1), 2, 4, 0)],
            w0(),
        );
        let sol = greedy_solve(&g, &batch);
        assert_eq!(sol.total_reward, 4);
        assert_eq!(sol.paths[&0].vertices, vec![0, 2, 1]);
    }

    #[test]
    fn edgeless_graph_serves_nothing() {
        let g = LogicalGraph::from_parts(
            vec![NodeId::ground(0), NodeId::ground(1)],
            2,
            vec![ResourceProfile::uniform(10); 2],
            &[],
            w0(),
        );
        let batch = RequestBatch::new(
            vec![Request::new(NodeId::ground(0), NodeId::ground(1), 1, 1, 0)],
            w0(),
        );
        let sol = greedy_solve(&g, &batch);
        assert!(sol.served.is_empty());
        assert_eq!(sol.total_reward, 0);
    }

    #[test]
    fn higher_ratio_request_wins_the_bottleneck() {
        // one satellite, single-channel edges: only one request fits
        let g = LogicalGraph::from_parts(
            vec![NodeId::ground(0), NodeId::ground(1), NodeId::satellite(0, 0)],
            2,
            vec![ResourceProfile::uniform(10); 3],
            &[(0, 2, 1), (2, 1, 1)],
            w0(),
        );
        let batch = RequestBatch::new(
            vec![
                Request::new(NodeId::ground(0), NodeId::ground(1), 1, 3, 0),
                Request::new(NodeId::ground(0), NodeId::ground(1), 1, 5, 1),
            ],
            w0(),
        );
        let sol = greedy_solve(&g, &batch);
        assert_eq!(sol.served.iter().copied().collect::<Vec<_>>(), vec![1]);
        assert_eq!(sol.total_reward, 5);
    }

    #[test]
    fn bfs_takes_longer_route_when_short_one_lacks_channels() {
        // diamond: 2-hop route via sat 2 has 1 channel (< demand 2),
        // 3-hop route via sats 3-4 has plenty
        let g = LogicalGraph::from_parts(
            vec![
                NodeId::ground(0),
                NodeId::ground(1),
                NodeId::satellite(0, 0),
                NodeId::satellite(0, 1),
                NodeId::satellite(0, 2),
            ],
            2,
            vec![ResourceProfile::uniform(10); 5],
            &[(0, 2, 1), (2, 1, 1), (0, 3, 5), (3, 4, 5), (4, 1, 5)],
            w0(),
        );
        let p = bfs_path(&g, 0, 1, 2, false).unwrap();
        assert_eq!(p.vertices, vec![0, 3, 4, 1]);
        // with demand 1 the short route wins
        let q = bfs_path(&g, 0, 1, 1, false).unwrap();
        assert_eq!(q.vertices, vec![0, 2, 1]);
    }

    #[test]
    fn saturated_edges_mean_no_path() {
        let mut g = LogicalGraph::from_parts(
            vec![NodeId::ground(0), NodeId::ground(1), NodeId::satellite(0, 0)],
            2,
            vec![ResourceProfile::uniform(10); 3],
            &[(0, 2, 2), (2, 1, 2)],
            w0(),
        );
        g.reserve_path(&EntanglementPath::new(vec![0, 2, 1], 2)).unwrap();
        assert!(bfs_path(&g, 0, 1, 1, false).is_none());
    }

    #[test]
    fn ground_transit_is_off_by_default() {
        // 0 -> sat 3 -> ground 2 -> sat 4 -> 1 is the only route
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
            w0(),
        );
        assert!(bfs_path(&g, 0, 1, 1, false).is_none());
        let p = bfs_path(&g, 0, 1, 1, true).unwrap();
        assert_eq!(p.vertices, vec![0, 3, 2, 4, 1]);
    }

    #[test]
    fn ratio_order_breaks_ties_by_index() {
        let batch = RequestBatch::new(
            vec![
                Request::new(NodeId::ground(0), NodeId::ground(1), 2, 4, 0), // ratio 2
                Request::new(NodeId::ground(0), NodeId::ground(1), 1, 5, 1), // ratio 5
                Request::new(NodeId::ground(1), NodeId::ground(2), 1, 2, 2), // ratio 2
            ],
            w0(),
        );
        assert_eq!(ratio_order(&batch), vec![1, 0, 2]);
    }
}
