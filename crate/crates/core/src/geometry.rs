//! Positions of satellites and ground stations over time, in a shared
//! Earth-centered inertial frame.
//!
//! The constellation is a Walker Star: `R` polar rings with ascending nodes
//! spread over 180 degrees, `K` evenly spaced satellites per ring, all on
//! circular orbits of the same radius. Ground stations sit on a spherical
//! Earth that rotates about the z axis.

use serde::{Deserialize, Serialize};

use crate::stations::Station;

/// Geodetic coordinate on the spherical Earth.
///
/// Longitude is normalized into `(-180, 180]` on construction; latitude must
/// already be in `[-90, 90]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoCoord {
    pub lat_deg: f64,
    pub lon_deg: f64,
}

impl GeoCoord {
    pub fn new(lat_deg: f64, lon_deg: f64) -> Self {
        assert!(
            (-90.0..=90.0).contains(&lat_deg),
            "latitude {lat_deg} out of [-90, 90]"
        );
        Self {
            lat_deg,
            lon_deg: normalize_lon(lon_deg),
        }
    }
}

/// Wrap a longitude in degrees into `(-180, 180]`.
pub fn normalize_lon(lon_deg: f64) -> f64 {
    let mut l = lon_deg % 360.0;
    if l <= -180.0 {
        l += 360.0;
    } else if l > 180.0 {
        l -= 360.0;
    }
    l
}

/// In-plane phasing between rings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseOffsetMode {
    /// All rings share the same slot phase. Keeps the edge set of an
    /// `(R, K)` constellation embedded in that of `(nR, mK)`.
    None,
    /// Ring `r` is advanced by `r * spread_deg / (R * K)` degrees so slots
    /// in adjacent rings do not line up at the poles.
    Walker { spread_deg: f64 },
}

/// All orbital, Earth, and sampling parameters of a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstellationConfig {
    /// Number of orbital rings (R).
    pub rings: usize,
    /// Satellites per ring (K).
    pub sats_per_ring: usize,
    pub altitude_km: f64,
    pub period_h: f64,
    pub earth_radius_km: f64,
    pub earth_rotation_deg_per_h: f64,
    /// Grazing floor for inter-satellite line of sight.
    pub atmosphere_cutoff_km: f64,
    pub phase_offset_mode: PhaseOffsetMode,
    /// Window sampling granularity in hours.
    pub sample_step_h: f64,
}

impl ConstellationConfig {
    pub fn new(rings: usize, sats_per_ring: usize) -> Self {
        Self {
            rings,
            sats_per_ring,
            altitude_km: 550.0,
            period_h: 1.5,
            earth_radius_km: 6371.0,
            earth_rotation_deg_per_h: 15.0,
            atmosphere_cutoff_km: 85.0,
            phase_offset_mode: PhaseOffsetMode::None,
            sample_step_h: 0.001,
        }
    }

    /// Radius of the satellite shell: Earth radius plus altitude.
    pub fn orbital_radius_km(&self) -> f64 {
        self.earth_radius_km + self.altitude_km
    }

    pub fn num_satellites(&self) -> usize {
        self.rings * self.sats_per_ring
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        anyhow::ensure!(self.rings >= 1, "rings must be >= 1");
        anyhow::ensure!(self.sats_per_ring >= 1, "sats_per_ring must be >= 1");
        anyhow::ensure!(self.altitude_km > 0.0, "altitude_km must be positive");
        anyhow::ensure!(self.period_h > 0.0, "period_h must be positive");
        anyhow::ensure!(self.sample_step_h > 0.0, "sample_step_h must be positive");
        anyhow::ensure!(self.earth_radius_km > 0.0, "earth_radius_km must be positive");
        anyhow::ensure!(
            self.atmosphere_cutoff_km >= 0.0 && self.atmosphere_cutoff_km <= self.altitude_km,
            "atmosphere_cutoff_km must be in [0, altitude_km]"
        );
        Ok(())
    }
}

/// A node of the physical network: a ground station or a satellite.
///
/// Canonical integer ids put the `G` ground stations first, then satellites
/// in ring-major order: ground `g` is `g`, satellite `(r, k)` is
/// `G + r*K + k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeId {
    Ground { index: usize },
    Satellite { ring: usize, slot: usize },
}

impl NodeId {
    pub fn ground(index: usize) -> Self {
        NodeId::Ground { index }
    }

    pub fn satellite(ring: usize, slot: usize) -> Self {
        NodeId::Satellite { ring, slot }
    }

    pub fn is_ground(&self) -> bool {
        matches!(self, NodeId::Ground { .. })
    }

    pub fn is_satellite(&self) -> bool {
        matches!(self, NodeId::Satellite { .. })
    }

    pub fn canonical(&self, num_ground: usize, sats_per_ring: usize) -> usize {
        match *self {
            NodeId::Ground { index } => index,
            NodeId::Satellite { ring, slot } => num_ground + ring * sats_per_ring + slot,
        }
    }

    pub fn from_canonical(id: usize, num_ground: usize, sats_per_ring: usize) -> Self {
        if id < num_ground {
            NodeId::Ground { index: id }
        } else {
            let s = id - num_ground;
            NodeId::Satellite {
                ring: s / sats_per_ring,
                slot: s % sats_per_ring,
            }
        }
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NodeId::Ground { index } => write!(f, "G{index}"),
            NodeId::Satellite { ring, slot } => write!(f, "S{ring}.{slot}"),
        }
    }
}

/// Earth-centered inertial position in km.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

/// Euclidean distance in km.
pub fn distance(p: Vec3, q: Vec3) -> f64 {
    (p - q).norm()
}

/// Position of satellite `(r, k)` at time `tau` (hours).
///
/// Ring `r` has ascending node `Omega = r * 180 / R`; the in-plane argument
/// is `u = k * 360 / K + phase(r) + 360 * tau / period`, and the satellite
/// sits at `a * (cos u cos Omega, cos u sin Omega, sin u)` — a circular
/// polar orbit whose plane contains the rotation axis.
pub fn satellite_position(cfg: &ConstellationConfig, r: usize, k: usize, tau: f64) -> Vec3 {
    assert!(r < cfg.rings, "ring index {r} out of range (R = {})", cfg.rings);
    assert!(
        k < cfg.sats_per_ring,
        "slot index {k} out of range (K = {})",
        cfg.sats_per_ring
    );
    let a = cfg.orbital_radius_km();
    let omega_deg = r as f64 * (180.0 / cfg.rings as f64);
    let phase_deg = match cfg.phase_offset_mode {
        PhaseOffsetMode::None => 0.0,
        PhaseOffsetMode::Walker { spread_deg } => {
            r as f64 * spread_deg / (cfg.rings as f64 * cfg.sats_per_ring as f64)
        }
    };
    let u_deg =
        k as f64 * (360.0 / cfg.sats_per_ring as f64) + phase_deg + 360.0 * (tau / cfg.period_h);
    let (sin_u, cos_u) = u_deg.to_radians().sin_cos();
    let (sin_o, cos_o) = omega_deg.to_radians().sin_cos();
    Vec3::new(a * cos_u * cos_o, a * cos_u * sin_o, a * sin_u)
}

/// Position of a ground station at time `tau` (hours). Stations co-rotate
/// with the Earth about the z axis.
pub fn ground_position(cfg: &ConstellationConfig, geo: GeoCoord, tau: f64) -> Vec3 {
    let lat = geo.lat_deg.to_radians();
    let lon = (geo.lon_deg + cfg.earth_rotation_deg_per_h * tau).to_radians();
    let (sin_lat, cos_lat) = lat.sin_cos();
    let (sin_lon, cos_lon) = lon.sin_cos();
    let re = cfg.earth_radius_km;
    Vec3::new(re * cos_lat * cos_lon, re * cos_lat * sin_lon, re * sin_lat)
}

/// A constellation plus a fixed set of ground stations; the dynamic network
/// whose snapshots everything downstream is built from.
#[derive(Debug, Clone)]
pub struct PhysicalNetwork {
    pub cfg: ConstellationConfig,
    pub stations: Vec<Station>,
}

impl PhysicalNetwork {
    pub fn new(cfg: ConstellationConfig, stations: Vec<Station>) -> Self {
        Self { cfg, stations }
    }

    pub fn num_ground(&self) -> usize {
        self.stations.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.num_ground() + self.cfg.num_satellites()
    }

    pub fn canonical(&self, node: NodeId) -> usize {
        node.canonical(self.num_ground(), self.cfg.sats_per_ring)
    }

    pub fn node_from_canonical(&self, id: usize) -> NodeId {
        assert!(id < self.num_nodes(), "canonical id {id} out of range");
        NodeId::from_canonical(id, self.num_ground(), self.cfg.sats_per_ring)
    }

    /// All nodes in canonical order.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.num_nodes()).map(|id| self.node_from_canonical(id))
    }

    pub fn position(&self, node: NodeId, tau: f64) -> Vec3 {
        match node {
            NodeId::Ground { index } => {
                ground_position(&self.cfg, self.stations[index].coord, tau)
            }
            NodeId::Satellite { ring, slot } => satellite_position(&self.cfg, ring, slot, tau),
        }
    }
}
