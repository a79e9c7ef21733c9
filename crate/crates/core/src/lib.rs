//! Satellite-assisted entanglement distribution: simulator and solvers.
//!
//! A Walker-Star LEO constellation and a pool of ground stations form a
//! dynamic physical network. For a service window the network collapses
//! into a static logical graph whose edges are node pairs within
//! line-of-sight range for the entire window, with per-edge channel
//! capacities and per-vertex transmitter/receiver/memory budgets. On that
//! graph the optimal entanglement distribution problem — pick a
//! maximum-reward subset of connection requests and resource-disjoint
//! satellite paths serving them — is solved three ways: a greedy heuristic,
//! an exact branch-and-bound over the integer multi-commodity flow
//! formulation, and the exact solver restricted to forbid inter-satellite
//! links.
//!
//! Modules:
//! * [`geometry`] — constellation and ground-station positions over time
//! * [`stations`] — the ground-station dataset (CSV, 60 built-in cities)
//! * [`visibility`] — range constants and the window edge rule
//! * [`logical_graph`] — graph construction and resource reservation
//! * [`requests`] — request batches and seeded generation
//! * [`solvers`] — greedy, exact, and restricted-exact OED solvers
//! * [`harness`] — the evaluation scenarios and CSV emission
//! * [`oracle`] — independent brute-force and chord oracles for tests
//! * [`rng`] — the pinned counter-based generator behind all randomness

pub mod geometry;
pub mod harness;
pub mod logical_graph;
pub mod oracle;
pub mod requests;
pub mod rng;
pub mod solvers;
pub mod stations;
pub mod visibility;

pub use geometry::{
    distance, ground_position, satellite_position, ConstellationConfig, GeoCoord, NodeId,
    PhaseOffsetMode, PhysicalNetwork, Vec3,
};
pub use logical_graph::{build_logical_graph, EntanglementPath, LogicalGraph, ResourceProfile};
pub use requests::{generate_requests, Request, RequestBatch};
pub use solvers::{
    bfs_path, exact_solve, exact_solve_with, extract_paths, greedy_solve, verify_solution,
    ExactOptions, FlowAssignment, Solution, SolveLimits, SolverKind,
};
pub use stations::{default_stations, load_stations, parse_stations_csv, Station};
pub use visibility::{
    edge_feasible, max_distance_over_window, range_ground_sat, range_sat_sat, TimeWindow,
};
