//! Independent desk-scale oracles, used by the test suites to confirm the
//! production paths: a brute-force OED optimum over exhaustive path
//! assignments, and a great-circle chord computed without the geometry
//! module.

use anyhow::ensure;

use crate::geometry::GeoCoord;
use crate::logical_graph::{EntanglementPath, LogicalGraph};
use crate::requests::RequestBatch;

const ORACLE_EARTH_RADIUS_KM: f64 = 6371.0;

/// Straight-line chord between two surface points, from the central-angle
/// formula (spherical law of cosines) rather than cartesian coordinates.
pub fn chord_distance(a: GeoCoord, b: GeoCoord) -> f64 {
    let (phi1, phi2) = (a.lat_deg.to_radians(), b.lat_deg.to_radians());
    let dlon = (a.lon_deg - b.lon_deg).to_radians();
    let cos_angle = (phi1.sin() * phi2.sin() + phi1.cos() * phi2.cos() * dlon.cos()).clamp(-1.0, 1.0);
    ORACLE_EARTH_RADIUS_KM * (2.0 - 2.0 * cos_angle).max(0.0).sqrt()
}

/// All simple satellite-transit paths between two ground vertices,
/// regardless of residual capacities (those are checked during replay).
fn all_simple_paths(g: &LogicalGraph, s: usize, t: usize, cap: usize) -> anyhow::Result<Vec<Vec<usize>>> {
    fn dfs(
        g: &LogicalGraph,
        t: usize,
        current: &mut Vec<usize>,
        on_path: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
        cap: usize,
    ) -> bool {
        let u = *current.last().unwrap();
        for (v, _) in g.neighbors(u) {
            if on_path[v] {
                continue;
            }
            if v == t {
                out.push({
                    let mut p = current.clone();
                    p.push(t);
                    p
                });
                if out.len() > cap {
                    return false;
                }
                continue;
            }
            if g.is_ground(v) {
                continue; // intermediates must be satellites
            }
            on_path[v] = true;
            current.push(v);
            let ok = dfs(g, t, current, on_path, out, cap);
            current.pop();
            on_path[v] = false;
            if !ok {
                return false;
            }
        }
        true
    }

    let mut out = Vec::new();
    let mut on_path = vec![false; g.vertex_count()];
    on_path[s] = true;
    let mut current = vec![s];
    ensure!(
        dfs(g, t, &mut current, &mut on_path, &mut out, cap),
        "path enumeration exceeded {cap} paths"
    );
    Ok(out)
}

/// Exhaustive OED optimum: every subset of requests crossed with every
/// assignment of simple paths, replayed through the reservation rules.
/// Refuses instances beyond desk scale (more than 8 vertices or 3
/// requests).
pub fn brute_force_oed(g: &LogicalGraph, batch: &RequestBatch) -> anyhow::Result<u64> {
    ensure!(
        g.vertex_count() <= 8,
        "brute force limited to 8 vertices, got {}",
        g.vertex_count()
    );
    ensure!(
        batch.requests.len() <= 3,
        "brute force limited to 3 requests, got {}",
        batch.requests.len()
    );

    let mut path_choices: Vec<Vec<EntanglementPath>> = Vec::new();
    for req in &batch.requests {
        let s = g.vertex_of(req.src).expect("request source in graph");
        let t = g.vertex_of(req.dst).expect("request destination in graph");
        let paths = all_simple_paths(g, s, t, 5000)?
            .into_iter()
            .map(|vertices| EntanglementPath::new(vertices, req.demand))
            .collect();
        path_choices.push(paths);
    }

    let n = batch.requests.len();
    let mut best = 0u64;
    for subset in 0u32..(1 << n) {
        let members: Vec<usize> = (0..n).filter(|i| subset & (1 << i) != 0).collect();
        let reward: u64 = members.iter().map(|&i| batch.requests[i].reward as u64).sum();
        if reward <= best {
            continue;
        }
        // odometer over path choices of the subset's members
        if members.iter().any(|&i| path_choices[i].is_empty()) {
            continue;
        }
        let mut counter = vec![0usize; members.len()];
        'assignments: loop {
            let mut residual = g.clone();
            let mut feasible = true;
            for (slot, &i) in members.iter().enumerate() {
                let path = &path_choices[i][counter[slot]];
                if residual.reserve_path(path).is_err() {
                    feasible = false;
                    break;
                }
            }
            if feasible {
                best = reward;
                break 'assignments;
            }
            // advance the odometer
            let mut pos = 0;
            loop {
                if pos == members.len() {
                    break 'assignments;
                }
                counter[pos] += 1;
                if counter[pos] < path_choices[members[pos]].len() {
                    break;
                }
                counter[pos] = 0;
                pos += 1;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{distance, ground_position, ConstellationConfig, NodeId};
    use crate::logical_graph::ResourceProfile;
    use crate::requests::Request;
    use crate::solvers::bfs_path;
    use crate::visibility::TimeWindow;

    #[test]
    fn chord_identities() {
        let a = GeoCoord::new(12.0, 34.0);
        assert_eq!(chord_distance(a, a), 0.0);
        let antipode = GeoCoord::new(-12.0, 34.0 - 180.0);
        assert!((chord_distance(a, antipode) - 2.0 * 6371.0).abs() < 1e-9);
    }

    #[test]
    fn chord_agrees_with_rotating_frame_positions() {
        let cfg = ConstellationConfig::new(2, 2);
        let a = GeoCoord::new(40.7128, -74.0060);
        let b = GeoCoord::new(1.3521, 103.8198);
        let expected = chord_distance(a, b);
        for tau in [0.0, 0.4, 7.9, 23.5] {
            let d = distance(ground_position(&cfg, a, tau), ground_position(&cfg, b, tau));
            assert!((d - expected).abs() < 1e-9 * expected, "tau={tau}");
        }
    }

    #[test]
    fn refuses_out_of_scope_instances() {
        let nodes: Vec<NodeId> = (0..2)
            .map(NodeId::ground)
            .chain((0..7).map(|k| NodeId::satellite(0, k)))
            .collect();
        let g = LogicalGraph::from_parts(
            nodes,
            2,
            vec![ResourceProfile::uniform(10); 9],
            &[],
            TimeWindow::new(0.0, 0.0),
        );
        let batch = RequestBatch::new(vec![], TimeWindow::new(0.0, 0.0));
        assert!(brute_force_oed(&g, &batch).is_err());
    }

    #[test]
    fn empty_batch_scores_zero() {
        let g = LogicalGraph::from_parts(
            vec![NodeId::ground(0), NodeId::ground(1), NodeId::satellite(0, 0)],
            2,
            vec![ResourceProfile::uniform(10); 3],
            &[(0, 2, 5), (2, 1, 5)],
            TimeWindow::new(0.0, 0.0),
        );
        let batch = RequestBatch::new(vec![], TimeWindow::new(0.0, 0.0));
        assert_eq!(brute_force_oed(&g, &batch).unwrap(), 0);
    }

    #[test]
    fn single_request_matches_bfs_existence() {
        let g = LogicalGraph::from_parts(
            vec![NodeId::ground(0), NodeId::ground(1), NodeId::satellite(0, 0)],
            2,
            vec![ResourceProfile::uniform(10); 3],
            &[(0, 2, 5), (2, 1, 5)],
            TimeWindow::new(0.0, 0.0),
        );
        let batch = RequestBatch::new(
            vec![Request::new(NodeId::ground(0), NodeId::ground(1), 2, 7, 0)],
            TimeWindow::new(0.0, 0.0),
        );
        assert!(bfs_path(&g, 0, 1, 2, false).is_some());
        assert_eq!(brute_force_oed(&g, &batch).unwrap(), 7);

        // demand above capacity: no path, zero reward
        let batch_heavy = RequestBatch::new(
            vec![Request::new(NodeId::ground(0), NodeId::ground(1), 6, 7, 0)],
            TimeWindow::new(0.0, 0.0),
        );
        assert!(bfs_path(&g, 0, 1, 6, false).is_none());
        assert_eq!(brute_force_oed(&g, &batch_heavy).unwrap(), 0);
    }
}
