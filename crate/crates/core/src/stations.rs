//! Ground-station dataset handling.
//!
//! Stations come from a CSV with header `name,lat_deg,lon_deg`, one row per
//! station. A default 60-city file ships with the crate.

use anyhow::{bail, Context};

use crate::geometry::GeoCoord;

/// A named ground station.
#[derive(Debug, Clone, PartialEq)]
pub struct Station {
    pub name: String,
    pub coord: GeoCoord,
}

const DEFAULT_STATIONS_CSV: &str = include_str!("../data/ground_stations.csv");

/// The built-in 60-city dataset.
pub fn default_stations() -> Vec<Station> {
    parse_stations_csv(DEFAULT_STATIONS_CSV).expect("built-in station dataset is valid")
}

/// Parse a station CSV (`name,lat_deg,lon_deg` header, one row per station).
pub fn parse_stations_csv(text: &str) -> anyhow::Result<Vec<Station>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().context("station CSV is empty")?;
    if header.trim() != "name,lat_deg,lon_deg" {
        bail!("bad station CSV header: expected `name,lat_deg,lon_deg`, got `{header}`");
    }
    let mut stations = Vec::new();
    for (lineno, line) in lines {
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 3 {
            bail!("line {}: expected 3 fields, got {}", lineno + 1, fields.len());
        }
        let name = fields[0].trim().to_string();
        if name.is_empty() {
            bail!("line {}: empty station name", lineno + 1);
        }
        let lat: f64 = fields[1]
            .trim()
            .parse()
            .with_context(|| format!("line {}: bad latitude", lineno + 1))?;
        let lon: f64 = fields[2]
            .trim()
            .parse()
            .with_context(|| format!("line {}: bad longitude", lineno + 1))?;
        if !(-90.0..=90.0).contains(&lat) {
            bail!("line {}: latitude {} out of [-90, 90]", lineno + 1, lat);
        }
        stations.push(Station {
            name,
            coord: GeoCoord::new(lat, lon),
        });
    }
    if stations.is_empty() {
        bail!("station CSV has no data rows");
    }
    let mut names: Vec<&str> = stations.iter().map(|s| s.name.as_str()).collect();
    names.sort_unstable();
    names.dedup();
    if names.len() != stations.len() {
        bail!("station CSV contains duplicate names");
    }
    Ok(stations)
}

/// Load stations from a file path.
pub fn load_stations(path: &std::path::Path) -> anyhow::Result<Vec<Station>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading station CSV {}", path.display()))?;
    parse_stations_csv(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Index of the station with the given name (case-sensitive).
pub fn find_station(stations: &[Station], name: &str) -> Option<usize> {
    stations.iter().position(|s| s.name == name)
}
