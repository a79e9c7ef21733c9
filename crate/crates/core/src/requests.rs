//! Connection requests and seeded batch generation.

use serde::{Deserialize, Serialize};

use crate::geometry::NodeId;
use crate::rng::SplitMix64;
use crate::visibility::TimeWindow;

/// A connection request: source and destination ground stations, an ebit
/// demand, and the reward collected if the request is served.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Request {
    pub src: NodeId,
    pub dst: NodeId,
    pub demand: u32,
    pub reward: u32,
    /// Position in the batch.
    pub index: usize,
}

impl Request {
    pub fn new(src: NodeId, dst: NodeId, demand: u32, reward: u32, index: usize) -> Self {
        assert!(src.is_ground() && dst.is_ground(), "endpoints must be ground stations");
        assert!(src != dst, "source and destination must differ");
        assert!(demand >= 1, "demand must be at least 1");
        assert!(reward >= 1, "reward must be at least 1");
        Self { src, dst, demand, reward, index }
    }
}

/// A batch of requests served together over one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestBatch {
    pub requests: Vec<Request>,
    pub window: TimeWindow,
}

impl RequestBatch {
    pub fn new(requests: Vec<Request>, window: TimeWindow) -> Self {
        Self { requests, window }
    }

    pub fn total_reward(&self) -> u64 {
        self.requests.iter().map(|r| r.reward as u64).sum()
    }
}

/// Generate `n` requests from the pinned splitmix64 stream of `seed`.
///
/// Draw order per request: source station, destination station (redrawn
/// while it collides with the source), demand in `{1..5}`, reward in
/// `{1..5}`. Station indices are uniform over `0..station_count`.
pub fn generate_requests(
    seed: u64,
    n: usize,
    station_count: usize,
) -> anyhow::Result<Vec<Request>> {
    anyhow::ensure!(station_count >= 2, "need at least two stations, got {station_count}");
    anyhow::ensure!(n >= 1, "need at least one request");
    let mut rng = SplitMix64::new(seed);
    let mut requests = Vec::with_capacity(n);
    for index in 0..n {
        let src = rng.next_below(station_count as u64) as usize;
        let mut dst = rng.next_below(station_count as u64) as usize;
        while dst == src {
            dst = rng.next_below(station_count as u64) as usize;
        }
        let demand = 1 + rng.next_below(5) as u32;
        let reward = 1 + rng.next_below(5) as u32;
        requests.push(Request::new(
            NodeId::ground(src),
            NodeId::ground(dst),
            demand,
            reward,
            index,
        ));
    }
    Ok(requests)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_gives_identical_batches() {
        let a = generate_requests(99, 50, 60).unwrap();
        let b = generate_requests(99, 50, 60).unwrap();
        assert_eq!(a, b);
        let c = generate_requests(100, 50, 60).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn endpoints_always_differ() {
        for seed in 0..20 {
            for r in generate_requests(seed, 200, 3).unwrap() {
                assert_ne!(r.src, r.dst);
            }
        }
    }

    #[test]
    fn demand_mean_is_near_three() {
        let reqs = generate_requests(7, 1000, 60).unwrap();
        let mean = reqs.iter().map(|r| r.demand as f64).sum::<f64>() / reqs.len() as f64;
        assert!((2.8..=3.2).contains(&mean), "mean demand {mean}");
    }

    #[test]
    fn too_few_stations_is_an_error() {
        assert!(generate_requests(1, 5, 1).is_err());
        assert!(generate_requests(1, 0, 60).is_err());
    }

    /// Pearson chi-square against the uniform null; `crit` is the critical
    /// value at significance 0.001 for the matching degrees of freedom.
    fn chi_square_uniform(counts: &[u64], crit: f64) {
        let total: u64 = counts.iter().sum();
        let expected = total as f64 / counts.len() as f64;
        let stat: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        assert!(
            stat < crit,
            "chi-square {stat:.2} exceeds critical value {crit} (df = {})",
            counts.len() - 1
        );
    }

    #[test]
    fn draws_pass_uniformity_chi_square() {
        let reqs = generate_requests(20260809, 20000, 60).unwrap();

        // demand and reward: df = 4, crit(0.001) = 18.47
        let mut demand = [0u64; 5];
        let mut reward = [0u64; 5];
        // source stations: df = 59, crit(0.001) = 98.32
        let mut src = [0u64; 60];
        for r in &reqs {
            demand[(r.demand - 1) as usize] += 1;
            reward[(r.reward - 1) as usize] += 1;
            if let NodeId::Ground { index } = r.src {
                src[index] += 1;
            }
        }
        chi_square_uniform(&demand, 18.47);
        chi_square_uniform(&reward, 18.47);
        chi_square_uniform(&src, 98.32);
    }
}
