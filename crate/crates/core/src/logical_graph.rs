//! The static logical graph of a time window.
//!
//! One vertex per physical node (vertex index = canonical node id, so the
//! node <-> vertex mappings are mutually inverse bijections by
//! construction), an undirected edge per node pair within communication
//! range throughout the window, an integer channel capacity per edge, and a
//! transmitter/receiver/memory budget per vertex. Reserving a path
//! subtracts from these residuals; releasing restores them.
//!
//! Topology (vertices, adjacency, edge endpoints) is immutable after
//! construction and shared behind an `Arc`; only the residual quantities
//! are cloned, which keeps graph copies cheap inside the exact solver.

use std::sync::Arc;

use anyhow::bail;
use serde::{Deserialize, Serialize};

use crate::geometry::{NodeId, PhysicalNetwork};
use crate::rng::pair_hash;
use crate::visibility::{pair_range, sample_times, TimeWindow};

/// Per-vertex resource budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceProfile {
    pub transmitters: u32,
    pub receivers: u32,
    pub memories: u32,
}

impl ResourceProfile {
    pub fn uniform(n: u32) -> Self {
        Self {
            transmitters: n,
            receivers: n,
            memories: n,
        }
    }
}

/// A service path: ordered vertex ids from source to destination, plus the
/// bandwidth it reserves on every hop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntanglementPath {
    pub vertices: Vec<usize>,
    pub demand: u32,
}

impl EntanglementPath {
    pub fn new(vertices: Vec<usize>, demand: u32) -> Self {
        Self { vertices, demand }
    }

    pub fn source(&self) -> usize {
        self.vertices[0]
    }

    pub fn destination(&self) -> usize {
        *self.vertices.last().unwrap()
    }

    pub fn hops(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn is_simple(&self) -> bool {
        let mut seen = self.vertices.clone();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }
}

#[derive(Debug)]
struct Topology {
    nodes: Vec<NodeId>,
    num_ground: usize,
    /// Per vertex: `(neighbor, edge index)` sorted by neighbor id.
    adjacency: Vec<Vec<(u32, u32)>>,
    /// Edge endpoints with `u < v`.
    edges: Vec<(u32, u32)>,
    window: TimeWindow,
}

/// Residual state: what is still free after prior reservations.
#[derive(Debug, Clone, PartialEq)]
struct Residual {
    resources: Vec<ResourceProfile>,
    channels: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct LogicalGraph {
    topo: Arc<Topology>,
    res: Residual,
}

impl PartialEq for LogicalGraph {
    fn eq(&self, other: &Self) -> bool {
        self.topo.nodes == other.topo.nodes
            && self.topo.num_ground == other.topo.num_ground
            && self.topo.edges == other.topo.edges
            && self.topo.window == other.topo.window
            && self.res == other.res
    }
}

/// Build the logical graph of `net` for the window `w`.
///
/// Edge channel counts are `1 + hash(channel_seed, min_id, max_id) mod 5`,
/// so they depend only on the seed and the canonical id pair, never on the
/// surrounding topology. Every vertex starts with a uniform
/// `resource_default` budget.
pub fn build_logical_graph(
    net: &PhysicalNetwork,
    w: &TimeWindow,
    channel_seed: u64,
    resource_default: u32,
) -> LogicalGraph {
    assert!(!net.stations.is_empty(), "station list must not be empty");
    let n = net.num_nodes();
    let nodes: Vec<NodeId> = net.nodes().collect();

    // positions of every node at every sample instant, node-major
    let times = sample_times(w, net.cfg.sample_step_h);
    let mut pos = Vec::with_capacity(n);
    for &node in &nodes {
        let series: Vec<crate::geometry::Vec3> =
            times.iter().map(|&t| net.position(node, t)).collect();
        pos.push(series);
    }

    let mut adjacency: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut channels: Vec<u32> = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let range = match pair_range(&net.cfg, nodes[u], nodes[v]) {
                None => continue,
                Some(r) => r,
            };
            let r2 = range * range;
            let mut feasible = true;
            for (pu, pv) in pos[u].iter().zip(pos[v].iter()) {
                let dx = pu.x - pv.x;
                let dy = pu.y - pv.y;
                let dz = pu.z - pv.z;
                if dx * dx + dy * dy + dz * dz > r2 {
                    feasible = false;
                    break;
                }
            }
            if !feasible {
                continue;
            }
            let edge_idx = edges.len() as u32;
            edges.push((u as u32, v as u32));
            channels.push(1 + (pair_hash(channel_seed, u as u64, v as u64) % 5) as u32);
            adjacency[u].push((v as u32, edge_idx));
            adjacency[v].push((u as u32, edge_idx));
        }
    }
    for adj in &mut adjacency {
        adj.sort_unstable();
    }

    LogicalGraph {
        topo: Arc::new(Topology {
            nodes,
            num_ground: net.num_ground(),
            adjacency,
            edges,
            window: *w,
        }),
        res: Residual {
            resources: vec![ResourceProfile::uniform(resource_default); n],
            channels,
        },
    }
}

impl LogicalGraph {
    /// Assemble a graph directly from vertices and edges. Used by tests and
    /// the brute-force oracle to build small hand-crafted instances.
    pub fn from_parts(
        nodes: Vec<NodeId>,
        num_ground: usize,
        resources: Vec<ResourceProfile>,
        edge_list: &[(usize, usize, u32)],
        window: TimeWindow,
    ) -> Self {
        assert_eq!(nodes.len(), resources.len());
        let n = nodes.len();
        let mut adjacency: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
        let mut edges = Vec::new();
        let mut channels = Vec::new();
        for &(a, b, ch) in edge_list {
            assert!(a < n && b < n && a != b, "bad edge ({a}, {b})");
            assert!(ch > 0, "channel count must be positive");
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            assert!(
                !(nodes[u].is_ground() && nodes[v].is_ground()),
                "ground-ground edges are not allowed"
            );
            let idx = edges.len() as u32;
            assert!(
                !adjacency[u].iter().any(|&(w, _)| w == v as u32),
                "duplicate edge ({u}, {v})"
            );
            edges.push((u as u32, v as u32));
            channels.push(ch);
            adjacency[u].push((v as u32, idx));
            adjacency[v].push((u as u32, idx));
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        Self {
            topo: Arc::new(Topology {
                nodes,
                num_ground,
                adjacency,
                edges,
                window,
            }),
            res: Residual { resources, channels },
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.topo.nodes.len()
    }

    pub fn ground_count(&self) -> usize {
        self.topo.num_ground
    }

    pub fn window(&self) -> TimeWindow {
        self.topo.window
    }

    /// Physical node behind a vertex (the `p` mapping).
    pub fn node(&self, v: usize) -> NodeId {
        self.topo.nodes[v]
    }

    /// Vertex behind a physical node (the `l` mapping). Canonical order
    /// coincides with `NodeId`'s ordering, so this is a binary search.
    pub fn vertex_of(&self, node: NodeId) -> Option<usize> {
        self.topo.nodes.binary_search(&node).ok()
    }

    pub fn is_ground(&self, v: usize) -> bool {
        v < self.topo.num_ground
    }

    pub fn resources(&self, v: usize) -> ResourceProfile {
        self.res.resources[v]
    }

    /// Neighbors of `v` in ascending vertex order, with residual channels.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.topo.adjacency[v]
            .iter()
            .map(move |&(nb, e)| (nb as usize, self.res.channels[e as usize]))
    }

    pub(crate) fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        let adj = &self.topo.adjacency[u];
        adj.binary_search_by_key(&(v as u32), |&(nb, _)| nb)
            .ok()
            .map(|i| adj[i].1 as usize)
    }

    /// Neighbors of `v` with the connecting edge's index and residual
    /// channels, in ascending vertex order.
    pub(crate) fn neighbors_with_edges(
        &self,
        v: usize,
    ) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        self.topo.adjacency[v]
            .iter()
            .map(move |&(nb, e)| (nb as usize, e as usize, self.res.channels[e as usize]))
    }

    /// Residual channels on edge `(u, v)`, or `None` if there is no edge.
    pub fn channels(&self, u: usize, v: usize) -> Option<u32> {
        self.edge_index(u, v).map(|e| self.res.channels[e])
    }

    pub fn edge_count(&self) -> usize {
        self.topo.edges.len()
    }

    /// All edges as `(u, v, residual channels)` with `u < v`, in a fixed
    /// deterministic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        self.topo
            .edges
            .iter()
            .zip(self.res.channels.iter())
            .map(|(&(u, v), &c)| (u as usize, v as usize, c))
    }

    pub fn sat_sat_edge_count(&self) -> usize {
        self.edges()
            .filter(|&(u, v, _)| !self.is_ground(u) && !self.is_ground(v))
            .count()
    }

    /// Ground vertices with at least one edge.
    pub fn ground_connected_count(&self) -> usize {
        (0..self.topo.num_ground)
            .filter(|&g| !self.topo.adjacency[g].is_empty())
            .count()
    }

    /// Per-vertex amounts `reserve_path` would subtract for this path:
    /// `(transmitters, receivers, memories)` keyed by position.
    fn vertex_costs(path: &EntanglementPath) -> impl Iterator<Item = (usize, u32, u32, u32)> + '_ {
        let d = path.demand;
        let last = path.vertices.len() - 1;
        path.vertices.iter().enumerate().map(move |(i, &v)| {
            if i == 0 {
                (v, d, 0, d)
            } else if i == last {
                (v, 0, d, d)
            } else {
                (v, d, d, 2 * d)
            }
        })
    }

    /// True iff every hop edge has residual channels for the demand and
    /// every vertex still has the resources the reservation would consume.
    pub fn check_path_feasible(&self, path: &EntanglementPath) -> bool {
        if path.vertices.len() < 2 || path.demand == 0 || !path.is_simple() {
            return false;
        }
        if path.vertices.iter().any(|&v| v >= self.vertex_count()) {
            return false;
        }
        for (u, v) in path.hops() {
            match self.channels(u, v) {
                Some(c) if c >= path.demand => {}
                _ => return false,
            }
        }
        for (v, tx, rx, mem) in Self::vertex_costs(path) {
            let r = self.res.resources[v];
            if r.transmitters < tx || r.receivers < rx || r.memories < mem {
                return false;
            }
        }
        true
    }

    /// Reserve the path, orienting it source -> destination: each hop
    /// consumes `d` channels; the source loses `d` transmitters and `d`
    /// memories, the destination `d` receivers and `d` memories, and each
    /// intermediate `d` transmitters, `d` receivers, and `2d` memories.
    /// An infeasible path is rejected and the graph left unchanged.
    pub fn reserve_path(&mut self, path: &EntanglementPath) -> anyhow::Result<()> {
        if !self.check_path_feasible(path) {
            bail!("path is not feasible on the residual graph");
        }
        let d = path.demand;
        for (u, v) in path.hops() {
            let e = self.edge_index(u, v).unwrap();
            self.res.channels[e] -= d;
        }
        for (v, tx, rx, mem) in Self::vertex_costs(path) {
            let r = &mut self.res.resources[v];
            r.transmitters -= tx;
            r.receivers -= rx;
            r.memories -= mem;
        }
        Ok(())
    }

    /// Exact inverse of [`LogicalGraph::reserve_path`].
    pub fn release_path(&mut self, path: &EntanglementPath) {
        let d = path.demand;
        for (u, v) in path.hops() {
            let e = self.edge_index(u, v).expect("released path must exist");
            self.res.channels[e] += d;
        }
        for (v, tx, rx, mem) in Self::vertex_costs(path) {
            let r = &mut self.res.resources[v];
            r.transmitters += tx;
            r.receivers += rx;
            r.memories += mem;
        }
    }

    /// Serializable dump of the full graph state.
    pub fn to_dump(&self) -> GraphDump {
        GraphDump {
            window: self.topo.window,
            vertices: (0..self.vertex_count())
                .map(|v| VertexDump {
                    id: v,
                    node: self.node(v),
                    resources: self.resources(v),
                })
                .collect(),
            edges: self
                .edges()
                .map(|(u, v, channels)| EdgeDump { u, v, channels })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VertexDump {
    pub id: usize,
    pub node: NodeId,
    pub resources: ResourceProfile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeDump {
    pub u: usize,
    pub v: usize,
    pub channels: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphDump {
    pub window: TimeWindow,
    pub vertices: Vec<VertexDump>,
    pub edges: Vec<EdgeDump>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConstellationConfig;
    use crate::stations::default_stations;
    use proptest::prelude::*;

    fn tiny_graph() -> LogicalGraph {
        // s = 0, t = 1 (ground); x = 2 (satellite); edges s-x and x-t
        LogicalGraph::from_parts(
            vec![NodeId::ground(0), NodeId::ground(1), NodeId::satellite(0, 0)],
            2,
            vec![ResourceProfile::uniform(10); 3],
            &[(0, 2, 5), (2, 1, 5)],
            TimeWindow::new(0.0, 0.0),
        )
    }

    #[test]
    fn build_is_deterministic_with_channels_in_range() {
        let net = PhysicalNetwork::new(ConstellationConfig::new(10, 10), default_stations());
        let w = TimeWindow::new(0.0, 0.0);
        let g1 = build_logical_graph(&net, &w, 42, 10);
        let g2 = build_logical_graph(&net, &w, 42, 10);
        assert_eq!(g1, g2);
        assert!(g1.edge_count() > 0);
        for (_, _, c) in g1.edges() {
            assert!((1..=5).contains(&c));
        }
        let g3 = build_logical_graph(&net, &w, 43, 10);
        assert!(g1.edges().zip(g3.edges()).any(|(a, b)| a.2 != b.2));
    }

    #[test]
    fn huge_delta_yields_edgeless_graph() {
        // over three quarters of an orbit every pair goes out of range
        let mut cfg = ConstellationConfig::new(2, 2);
        cfg.sample_step_h = 0.01;
        let net = PhysicalNetwork::new(cfg, default_stations());
        let g = build_logical_graph(&net, &TimeWindow::new(0.0, 1.2), 7, 10);
        assert_eq!(g.vertex_count(), 64);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn reserve_applies_role_based_costs() {
        let mut g = tiny_graph();
        let path = EntanglementPath::new(vec![0, 2, 1], 1);
        assert!(g.check_path_feasible(&path));
        g.reserve_path(&path).unwrap();
        assert_eq!(g.resources(0).transmitters, 9);
        assert_eq!(g.resources(0).receivers, 10);
        assert_eq!(g.resources(0).memories, 9);
        assert_eq!(g.resources(2).transmitters, 9);
        assert_eq!(g.resources(2).receivers, 9);
        assert_eq!(g.resources(2).memories, 8);
        assert_eq!(g.resources(1).transmitters, 10);
        assert_eq!(g.resources(1).receivers, 9);
        assert_eq!(g.resources(1).memories, 9);
        assert_eq!(g.channels(0, 2), Some(4));
        assert_eq!(g.channels(2, 1), Some(4));
    }

    #[test]
    fn capacity_exhaustion_rejects_second_reservation() {
        let mut g = tiny_graph();
        let path = EntanglementPath::new(vec![0, 2, 1], 5);
        g.reserve_path(&path).unwrap();
        let before = g.clone();
        assert!(g.reserve_path(&path).is_err());
        assert_eq!(g, before);
    }

    #[test]
    fn malformed_paths_are_infeasible() {
        let g = tiny_graph();
        // repeated vertex
        assert!(!g.check_path_feasible(&EntanglementPath::new(vec![0, 2, 0], 1)));
        // zero demand
        assert!(!g.check_path_feasible(&EntanglementPath::new(vec![0, 2, 1], 0)));
        // missing edge
        assert!(!g.check_path_feasible(&EntanglementPath::new(vec![0, 1], 1)));
    }

    #[test]
    fn channels_are_stable_across_topologies() {
        // same canonical pair id -> same channel count regardless of R, K
        let stations = default_stations();
        let w = TimeWindow::new(0.0, 0.0);
        let net_a = PhysicalNetwork::new(ConstellationConfig::new(10, 10), stations.clone());
        let net_b = PhysicalNetwork::new(ConstellationConfig::new(12, 10), stations);
        let ga = build_logical_graph(&net_a, &w, 5, 10);
        let gb = build_logical_graph(&net_b, &w, 5, 10);
        let mut checked = 0;
        for (u, v, c) in ga.edges() {
            if let Some(cb) = gb.channels(u, v) {
                assert_eq!(c, cb);
                checked += 1;
            }
        }
        assert!(checked > 0);
    }

    proptest! {
        #[test]
        fn reserve_then_release_roundtrips(demand in 1u32..4, budget in 8u32..16, ch in 4u32..9) {
            let mut g = LogicalGraph::from_parts(
                vec![
                    NodeId::ground(0),
                    NodeId::ground(1),
                    NodeId::satellite(0, 0),
                    NodeId::satellite(0, 1),
                ],
                2,
                vec![ResourceProfile::uniform(budget); 4],
                &[(0, 2, ch), (2, 3, ch), (3, 1, ch)],
                TimeWindow::new(0.0, 0.0),
            );
            let pristine = g.clone();
            let path = EntanglementPath::new(vec![0, 2, 3, 1], demand);
            g.reserve_path(&path).unwrap();
            prop_assert!(g != pristine);
            g.release_path(&path);
            prop_assert!(g == pristine);
        }
    }
}
