//! Ad-hoc performance probe for the heavy evaluation cells. Ignored by
//! default; run with
//! `cargo test --release -p oed-core --test perf_probe -- --ignored --nocapture`.

use std::time::Instant;

use oed_core::harness::{run_case_on_graph, scenario_three_batch_seed, HarnessConfig};
use oed_core::solvers::debug_root_gap;
use oed_core::{
    build_logical_graph, default_stations, generate_requests, ConstellationConfig,
    PhysicalNetwork, RequestBatch, TimeWindow,
};

fn cell(rk: usize, delta: f64, n: usize, j: usize) -> (oed_core::LogicalGraph, RequestBatch, u64) {
    let stations = default_stations();
    let tau = 0.5 * (j as f64 - 1.0);
    let window = TimeWindow::new(tau, delta);
    let cfg = ConstellationConfig::new(rk, rk);
    let net = PhysicalNetwork::new(cfg, stations);
    let g = build_logical_graph(&net, &window, 1, 10);
    let seed = scenario_three_batch_seed(42, n, j);
    let batch = RequestBatch::new(generate_requests(seed, n, 60).unwrap(), window);
    (g, batch, seed)
}

#[test]
#[ignore]
fn dump_instances_for_external_check() {
    for (rk, delta, n, j) in [
        (15, 0.05, 30, 5),
        (20, 0.001, 30, 9),
        (20, 0.1, 30, 13),
        (20, 0.001, 20, 17),
        (20, 0.01, 30, 21),
        (10, 0.05, 30, 7),
        (10, 0.1, 20, 11),
        (15, 0.01, 20, 25),
    ] {
        let (g, batch, _) = cell(rk, delta, n, j);
        let dump = serde_json::json!({
            "graph": g.to_dump(),
            "requests": batch.requests.iter().map(|r| {
                serde_json::json!({
                    "src": g.vertex_of(r.src).unwrap(),
                    "dst": g.vertex_of(r.dst).unwrap(),
                    "demand": r.demand,
                    "reward": r.reward,
                })
            }).collect::<Vec<_>>(),
        });
        let path = format!("/tmp/instance_rk{rk}_d{delta}_n{n}_j{j}.json");
        std::fs::write(&path, serde_json::to_string(&dump).unwrap()).unwrap();
        println!("wrote {path}");
    }
}

#[test]
#[ignore]
fn probe_root_gaps() {
    for (rk, delta, n, j) in [
        (15, 0.05, 30, 5),
        (20, 0.001, 30, 9),
        (20, 0.1, 30, 13),
        (20, 0.001, 20, 17),
        (20, 0.01, 30, 21),
    ] {
        let (g, batch, _) = cell(rk, delta, n, j);
        let t0 = Instant::now();
        let report = debug_root_gap(&g, &batch);
        println!(
            "rk={rk} delta={delta} n={n} j={j}: {report} ({:.2}s)",
            t0.elapsed().as_secs_f64()
        );
    }
}

#[test]
#[ignore]
fn probe_heavy_cells() {
    let stations = default_stations();
    let hc = HarnessConfig::new(stations.clone(), 1);
    for (rk, delta, n, j) in [
        (10, 0.1, 30, 1),
        (15, 0.05, 30, 5),
        (20, 0.001, 30, 9),
        (20, 0.1, 30, 13),
        (20, 0.001, 20, 17),
        (20, 0.01, 30, 21),
        (20, 0.001, 30, 33),
    ] {
        let (g, batch, seed) = cell(rk, delta, n, j);
        let t1 = Instant::now();
        let row = run_case_on_graph(&hc, &g, &batch, "probe", rk, rk, seed);
        let solve_s = t1.elapsed().as_secs_f64();
        println!(
            "rk={rk} delta={delta} n={n} j={j}: solve {solve_s:.3}s \
             greedy={} exact={} rexact={} limited={}/{} t_exact={:.4}s t_greedy={:.6}s",
            row.reward_greedy,
            row.reward_exact,
            row.reward_rexact,
            row.exact_limited,
            row.rexact_limited,
            row.time_exact_s,
            row.time_greedy_s,
        );
    }
}
