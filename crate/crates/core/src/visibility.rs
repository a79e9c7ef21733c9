//! Communication-range constants and the max-distance-over-window test that
//! decides logical-graph edges.
//!
//! Ranges are pure line-of-sight thresholds: a satellite and a ground
//! station can link while their sight line stays above the surface, two
//! satellites while theirs stays above the atmosphere cutoff. An edge
//! survives a window `[tau, tau+delta]` only if the pair is within range at
//! every sampled instant.

use serde::{Deserialize, Serialize};

use crate::geometry::{distance, ConstellationConfig, NodeId, PhysicalNetwork};

/// The service interval `[tau, tau + delta]`, in hours.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub tau_h: f64,
    pub delta_h: f64,
}

impl TimeWindow {
    pub fn new(tau_h: f64, delta_h: f64) -> Self {
        assert!(tau_h >= 0.0, "tau must be nonnegative");
        assert!(delta_h >= 0.0, "delta must be nonnegative");
        Self { tau_h, delta_h }
    }

    pub fn end_h(&self) -> f64 {
        self.tau_h + self.delta_h
    }
}

/// Slant range between a satellite and a ground station at zero elevation:
/// the line of sight grazes the surface.
pub fn range_ground_sat(cfg: &ConstellationConfig) -> f64 {
    let a = cfg.orbital_radius_km();
    let re = cfg.earth_radius_km;
    (a * a - re * re).sqrt()
}

/// Longest chord between two satellites on the shell whose line of sight
/// clears the atmosphere cutoff altitude.
pub fn range_sat_sat(cfg: &ConstellationConfig) -> f64 {
    let a = cfg.orbital_radius_km();
    let floor = cfg.earth_radius_km + cfg.atmosphere_cutoff_km;
    2.0 * (a * a - floor * floor).sqrt()
}

/// Sample instants of a window at the given step.
///
/// Grid points `tau + i*step` lie on a shared lattice so that the sample set
/// of a window is contained in that of any wider window whose `delta` is a
/// multiple of the same step; the window end is always included (as the last
/// lattice point when `delta` is a whole number of steps, as an extra sample
/// otherwise). `delta = 0` yields the single sample `tau`.
pub fn sample_times(w: &TimeWindow, step_h: f64) -> Vec<f64> {
    assert!(step_h > 0.0, "sample step must be positive");
    let ratio = w.delta_h / step_h;
    let steps = if (ratio - ratio.round()).abs() < 1e-9 {
        ratio.round() as u64
    } else {
        ratio.floor() as u64
    };
    let mut times = Vec::with_capacity(steps as usize + 2);
    for i in 0..=steps {
        times.push(w.tau_h + i as f64 * step_h);
    }
    let end = w.end_h();
    if end > *times.last().unwrap() + 1e-12 {
        times.push(end);
    }
    times
}

/// Maximum distance between two nodes over the sampled window.
pub fn max_distance_over_window(
    net: &PhysicalNetwork,
    a: NodeId,
    b: NodeId,
    w: &TimeWindow,
) -> f64 {
    assert!(a != b, "node pair must be distinct");
    let mut max_d = 0.0f64;
    for t in sample_times(w, net.cfg.sample_step_h) {
        let d = distance(net.position(a, t), net.position(b, t));
        if d > max_d {
            max_d = d;
        }
    }
    max_d
}

/// Line-of-sight range applicable to a node pair; `None` for ground-ground
/// pairs, which are never linked.
pub fn pair_range(cfg: &ConstellationConfig, a: NodeId, b: NodeId) -> Option<f64> {
    match (a.is_ground(), b.is_ground()) {
        (true, true) => None,
        (false, false) => Some(range_sat_sat(cfg)),
        _ => Some(range_ground_sat(cfg)),
    }
}

/// Whether the pair stays within communication range over the whole window.
pub fn edge_feasible(net: &PhysicalNetwork, a: NodeId, b: NodeId, w: &TimeWindow) -> bool {
    assert!(a != b, "node pair must be distinct");
    match pair_range(&net.cfg, a, b) {
        None => false,
        Some(range) => max_distance_over_window(net, a, b, w) <= range,
    }
}
