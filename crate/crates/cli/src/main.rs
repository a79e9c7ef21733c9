//! `oed` — build logical graphs, solve entanglement distribution batches,
//! and reproduce the evaluation scenarios from the command line.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use oed_core::harness::{
    aggregate_to_csv, results_to_csv, scenario_one, scenario_three, scenario_two, HarnessConfig,
    DEFAULT_NODE_LIMIT,
};
use oed_core::{
    build_logical_graph, default_stations, generate_requests, load_stations, verify_solution,
    ConstellationConfig, ExactOptions, NodeId, PhaseOffsetMode, PhysicalNetwork, Request,
    RequestBatch, Solution, SolveLimits, Station, TimeWindow,
};

/// Run configuration, read from a JSON document; command-line flags
/// override individual fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RunConfig {
    rings: usize,
    sats_per_ring: usize,
    altitude_km: f64,
    period_h: f64,
    earth_radius_km: f64,
    earth_rotation_deg_per_h: f64,
    atmosphere_cutoff_km: f64,
    phase_offset_mode: PhaseOffsetMode,
    sample_step_h: f64,
    /// Station CSV path; `null` selects the built-in 60-city dataset.
    stations_csv: Option<PathBuf>,
    /// Batch seed (request generation, scenario base seed).
    seed: u64,
    /// Seed behind per-edge channel counts.
    channel_seed: u64,
    resource_default: u32,
    allow_isl: bool,
    allow_ground_transit: bool,
    time_limit_s: Option<f64>,
    out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            rings: 10,
            sats_per_ring: 10,
            altitude_km: 550.0,
            period_h: 1.5,
            earth_radius_km: 6371.0,
            earth_rotation_deg_per_h: 15.0,
            atmosphere_cutoff_km: 85.0,
            phase_offset_mode: PhaseOffsetMode::None,
            sample_step_h: 0.001,
            stations_csv: None,
            seed: 42,
            channel_seed: 7,
            resource_default: 10,
            allow_isl: true,
            allow_ground_transit: false,
            time_limit_s: None,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                let cfg: RunConfig = serde_json::from_str(&text)
                    .with_context(|| format!("parsing config {}", p.display()))?;
                Ok(cfg)
            }
        }
    }

    fn constellation(&self) -> anyhow::Result<ConstellationConfig> {
        let cfg = ConstellationConfig {
            rings: self.rings,
            sats_per_ring: self.sats_per_ring,
            altitude_km: self.altitude_km,
            period_h: self.period_h,
            earth_radius_km: self.earth_radius_km,
            earth_rotation_deg_per_h: self.earth_rotation_deg_per_h,
            atmosphere_cutoff_km: self.atmosphere_cutoff_km,
            phase_offset_mode: self.phase_offset_mode,
            sample_step_h: self.sample_step_h,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn stations(&self) -> anyhow::Result<Vec<Station>> {
        match &self.stations_csv {
            None => Ok(default_stations()),
            Some(p) => load_stations(p),
        }
    }

    fn limits(&self) -> SolveLimits {
        SolveLimits {
            time_limit_s: self.time_limit_s,
            node_limit: Some(DEFAULT_NODE_LIMIT),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "oed",
    about = "Satellite-assisted entanglement distribution: graphs, solvers, scenarios"
)]
struct Cli {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Batch / scenario seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Forbid inter-satellite links in the exact solver.
    #[arg(long, global = true)]
    no_isl: bool,
    /// Let paths route through intermediate ground stations.
    #[arg(long, global = true)]
    allow_ground_transit: bool,
    /// Wall-clock limit per exact solve, in seconds.
    #[arg(long, global = true)]
    time_limit_s: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the logical graph for a window and write it as JSON.
    Graph {
        #[arg(long, default_value_t = 0.0)]
        tau: f64,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
    },
    /// Solve one batch (from a file or generated from the seed).
    Solve {
        /// Manual batch file: one `src_city dst_city demand reward` per line.
        #[arg(long)]
        batch: Option<PathBuf>,
        /// Number of requests to generate when no batch file is given.
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        tau: f64,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        /// Run the greedy solver.
        #[arg(long)]
        greedy: bool,
        /// Run the exact solver.
        #[arg(long)]
        exact: bool,
        /// Run the restricted (no-ISL) exact solver.
        #[arg(long)]
        rexact: bool,
    },
    /// Run an evaluation scenario (i, ii, or iii) and write its CSVs.
    Scenario { which: String },
}

fn write_output(dir: &Path, name: &str, contents: &str) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// Parse a manual batch file against the station list. Unknown station
/// names are collected and reported together.
fn parse_batch_file(
    text: &str,
    stations: &[Station],
    window: TimeWindow,
) -> anyhow::Result<RequestBatch> {
    let mut requests = Vec::new();
    let mut unknown: BTreeSet<String> = BTreeSet::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            bail!(
                "batch line {}: expected `src_city dst_city demand reward`, got `{line}`",
                lineno + 1
            );
        }
        let mut resolve = |name: &str| match oed_core::stations::find_station(stations, name) {
            Some(idx) => Some(idx),
            None => {
                unknown.insert(name.to_string());
                None
            }
        };
        let src = resolve(fields[0]);
        let dst = resolve(fields[1]);
        let demand: u32 = fields[2]
            .parse()
            .with_context(|| format!("batch line {}: bad demand", lineno + 1))?;
        let reward: u32 = fields[3]
            .parse()
            .with_context(|| format!("batch line {}: bad reward", lineno + 1))?;
        if demand < 1 || reward < 1 {
            bail!("batch line {}: demand and reward must be at least 1", lineno + 1);
        }
        if let (Some(s), Some(t)) = (src, dst) {
            if s == t {
                bail!("batch line {}: source equals destination", lineno + 1);
            }
            let index = requests.len();
            requests.push(Request::new(
                NodeId::ground(s),
                NodeId::ground(t),
                demand,
                reward,
                index,
            ));
        }
    }
    if !unknown.is_empty() {
        bail!(
            "unknown stations in batch file: {}",
            unknown.into_iter().collect::<Vec<_>>().join(", ")
        );
    }
    Ok(RequestBatch::new(requests, window))
}

fn cmd_graph(cfg: &RunConfig, tau: f64, delta: f64) -> anyhow::Result<()> {
    let constellation = cfg.constellation()?;
    let stations = cfg.stations()?;
    let net = PhysicalNetwork::new(constellation, stations);
    let window = TimeWindow::new(tau, delta);
    let g = build_logical_graph(&net, &window, cfg.channel_seed, cfg.resource_default);
    let dump = g.to_dump();
    let json = serde_json::to_string_pretty(&dump)?;
    let path = write_output(&cfg.out_dir, "graph.json", &json)?;
    println!(
        "graph: {} vertices, {} ground stations with edges, {} sat-sat edges, {} edges total -> {}",
        g.vertex_count(),
        g.ground_connected_count(),
        g.sat_sat_edge_count(),
        g.edge_count(),
        path.display()
    );
    Ok(())
}

fn cmd_solve(
    cfg: &RunConfig,
    batch_file: Option<&Path>,
    n: usize,
    tau: f64,
    delta: f64,
    run_greedy: bool,
    run_exact: bool,
    run_rexact: bool,
) -> anyhow::Result<()> {
    let constellation = cfg.constellation()?;
    let stations = cfg.stations()?;
    let window = TimeWindow::new(tau, delta);
    let batch = match batch_file {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading batch file {}", p.display()))?;
            parse_batch_file(&text, &stations, window)?
        }
        None => RequestBatch::new(generate_requests(cfg.seed, n, stations.len())?, window),
    };
    let net = PhysicalNetwork::new(constellation, stations);
    let g = build_logical_graph(&net, &window, cfg.channel_seed, cfg.resource_default);

    // no explicit selection means run everything
    let all = !(run_greedy || run_exact || run_rexact);
    let mut outputs: Vec<(&str, Solution)> = Vec::new();
    if run_greedy || all {
        outputs.push(("greedy", oed_core::greedy_solve(&g, &batch)));
    }
    if run_exact || all {
        outputs.push((
            "exact",
            oed_core::exact_solve_with(
                &g,
                &batch,
                ExactOptions {
                    allow_isl: cfg.allow_isl,
                    allow_ground_transit: cfg.allow_ground_transit,
                    limits: cfg.limits(),
                    warm_start: None,
                },
            ),
        ));
    }
    if run_rexact || all {
        outputs.push((
            "rexact",
            oed_core::exact_solve_with(
                &g,
                &batch,
                ExactOptions {
                    allow_isl: false,
                    allow_ground_transit: cfg.allow_ground_transit,
                    limits: cfg.limits(),
                    warm_start: None,
                },
            ),
        ));
    }

    for (name, sol) in &outputs {
        let report = verify_solution(&g, &batch, sol, cfg.allow_ground_transit);
        if !report.is_ok() {
            bail!("{name} solution failed verification: {:?}", report.violations);
        }
        let json = serde_json::to_string_pretty(sol)?;
        write_output(&cfg.out_dir, &format!("solution_{name}.json"), &json)?;
        println!(
            "reward_{name}={} served={} proven_optimal={} runtime_s={:.6}",
            sol.total_reward,
            sol.served.len(),
            sol.proven_optimal,
            sol.runtime_s
        );
    }
    Ok(())
}

fn cmd_scenario(cfg: &RunConfig, which: &str) -> anyhow::Result<()> {
    let mut hc = HarnessConfig::new(cfg.stations()?, cfg.channel_seed);
    hc.template = cfg.constellation()?;
    hc.resource_default = cfg.resource_default;
    if cfg.time_limit_s.is_some() {
        hc.limits.time_limit_s = cfg.time_limit_s;
    }
    match which {
        "i" => {
            let results = scenario_one(&hc)?;
            let path = write_output(&cfg.out_dir, "scenario_i.csv", &results_to_csv(&results))?;
            println!("scenario i: {} rows -> {}", results.len(), path.display());
        }
        "ii" => {
            let results = scenario_two(&hc, cfg.seed)?;
            let path = write_output(&cfg.out_dir, "scenario_ii.csv", &results_to_csv(&results))?;
            println!("scenario ii: {} rows -> {}", results.len(), path.display());
        }
        "iii" => {
            let (results, aggregate) = scenario_three(&hc, cfg.seed)?;
            let path = write_output(&cfg.out_dir, "scenario_iii.csv", &results_to_csv(&results))?;
            let agg_path = write_output(
                &cfg.out_dir,
                "scenario_iii_aggregate.csv",
                &aggregate_to_csv(&aggregate),
            )?;
            let limited = results
                .iter()
                .filter(|r| r.exact_limited || r.rexact_limited)
                .count();
            println!(
                "scenario iii: {} rows ({} budget-limited) -> {}, aggregate -> {}",
                results.len(),
                limited,
                path.display(),
                agg_path.display()
            );
        }
        other => bail!("unknown scenario `{other}`: expected i, ii, or iii"),
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(dir) = cli.out_dir {
        cfg.out_dir = dir;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.no_isl {
        cfg.allow_isl = false;
    }
    if cli.allow_ground_transit {
        cfg.allow_ground_transit = true;
    }
    if cli.time_limit_s.is_some() {
        cfg.time_limit_s = cli.time_limit_s;
    }

    match &cli.command {
        Command::Graph { tau, delta } => cmd_graph(&cfg, *tau, *delta),
        Command::Solve {
            batch,
            n,
            tau,
            delta,
            greedy,
            exact,
            rexact,
        } => cmd_solve(
            &cfg,
            batch.as_deref(),
            *n,
            *tau,
            *delta,
            *greedy,
            *exact,
            *rexact,
        ),
        Command::Scenario { which } => cmd_scenario(&cfg, which),
    }
}
