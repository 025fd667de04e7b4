use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};

use graphnoc::config::{parse_noc_params, parse_raw, validate_config, ConfigError, ExperimentConfig, Strategy};
use graphnoc::engine::TrafficTrace;
use graphnoc::graph::{generate_power_law_graph, load_edge_list, PowerLawParams};
use graphnoc::noc::{compare, replay, ReportSummary};
use graphnoc::partition::{partition, PartitionConfig};
use graphnoc::placement::{
    build_topology_graph, random_placement, solve_placement_exact, solve_placement_restarts, ConstraintMode, Coord, CostMode, ExactOptions, GridSpec,
    Placement, PlacementProblem, Topology, TopologyGraph, WeightMode,
};

#[derive(Parser)]
#[command(name = "graphnoc", version, about = "Partition, place and replay graph-analytics traffic on a NoC")]
struct Cli {
    /// Base seed for generators and placement solvers.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// mesh or fbfly.
    #[arg(long, global = true)]
    topology: Option<Topology>,
    /// paper or corrected.
    #[arg(long, global = true)]
    cost_mode: Option<CostMode>,
    /// exact, heuristic or random.
    #[arg(long, global = true)]
    strategy: Option<Strategy>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a full experiment from a config file.
    Run { config: PathBuf },
    /// Validate a config file and print its canonical form.
    Validate { config: PathBuf },
    /// Generate a power-law graph from a key=value parameter file.
    GenGraph { params: PathBuf, out: PathBuf },
    /// Partition an edge list into K classes; writes shard, membership and topology CSVs.
    Partition {
        graph: PathBuf,
        clusters: usize,
        out: PathBuf,
        #[arg(long)]
        weighted: bool,
        #[arg(long, default_value_t = 1 << 20)]
        capacity_edges: usize,
        #[arg(long, default_value_t = 1 << 20)]
        capacity_vertices: usize,
    },
    /// Place a topology graph on a WxH grid.
    Place {
        topology_file: PathBuf,
        grid: String,
        strategy: Strategy,
        out: PathBuf,
        #[arg(long, default_value = "strict")]
        constraints: ConstraintMode,
        #[arg(long, default_value_t = 200_000)]
        budget: usize,
        #[arg(long, default_value_t = 4)]
        restarts: u64,
    },
    /// Replay a trace over a placement; writes summary.csv and iterations.csv.
    Replay { trace: PathBuf, placement: PathBuf, params: PathBuf, out: PathBuf },
    /// Compare an optimized report against a baseline report.
    Compare { report_a: PathBuf, report_b: PathBuf },
}

/// Failure classes mapped to exit codes 1 and 2.
enum Failure {
    Validation(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Unreadable { .. } => Failure::Runtime(e.into()),
            other => Failure::Validation(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("invalid: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn parse_grid(s: &str, topology: Topology) -> Result<GridSpec, Failure> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| Failure::Validation(format!("grid {s:?} is not WxH")))?;
    let w = w.parse().map_err(|_| Failure::Validation(format!("bad grid width in {s:?}")))?;
    let h = h.parse().map_err(|_| Failure::Validation(format!("bad grid height in {s:?}")))?;
    Ok(GridSpec::new(w, h, topology))
}

fn apply_overrides(cli: &Cli, cfg: &mut ExperimentConfig) {
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &cli.output_dir {
        cfg.output_dir = dir.clone();
    }
    if let Some(t) = cli.topology {
        cfg.topologies = vec![t];
    }
    if let Some(m) = cli.cost_mode {
        cfg.cost_mode = m;
    }
    if let Some(s) = cli.strategy {
        cfg.strategies = if s == Strategy::Random { Vec::new() } else { vec![s] };
    }
}

fn load_config(cli: &Cli, path: &Path) -> Result<ExperimentConfig, Failure> {
    let mut cfg = validate_config(path)?;
    apply_overrides(cli, &mut cfg);
    let base = path.parent().unwrap_or(Path::new("."));
    let v = cfg.violations(base);
    if !v.is_empty() {
        return Err(ConfigError::Invalid(v).into());
    }
    Ok(cfg)
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    let topology = cli.topology.unwrap_or_default();
    let cost_mode = cli.cost_mode.unwrap_or_default();
    match &cli.command {
        Command::Run { config } => {
            let cfg = load_config(cli, config)?;
            let table = graphnoc::run_experiment(&cfg)?;
            println!("{:<10} {:<6} {:<10} {:>9} {:>9} {:>9} {:>9}", "algorithm", "topo", "strategy", "avg_hop", "hop_red", "speedup", "energy");
            for r in &table.rows {
                println!(
                    "{:<10} {:<6} {:<10} {:>9.3} {:>9.3} {:>9.3} {:>9.3}",
                    r.algorithm, r.topology, r.strategy, r.avg_hop, r.hop_reduction, r.speedup, r.energy_ratio
                );
            }
            println!("artifacts in {}", cfg.output_dir.display());
        }
        Command::Validate { config } => {
            let cfg = load_config(cli, config)?;
            print!("{}", cfg.canonical());
        }
        Command::GenGraph { params, out } => {
            let text = fs::read_to_string(params).with_context(|| format!("reading {}", params.display()))?;
            let raw = parse_raw(&text)?;
            let mut p = PowerLawParams { num_vertices: 1 << 14, avg_degree: 8.0, skew: 1.0, seed: 42 };
            let mut errs = Vec::new();
            for (section, entries) in &raw.sections {
                if !(section.is_empty() || section == "graph") {
                    errs.push(format!("unexpected section [{section}]"));
                }
                for (key, (value, line)) in entries {
                    let bad = || format!("line {line}: cannot parse {key} = {value:?}");
                    match key.as_str() {
                        "num_vertices" => p.num_vertices = value.parse().unwrap_or_else(|_| { errs.push(bad()); 0 }),
                        "avg_degree" => p.avg_degree = value.parse().unwrap_or_else(|_| { errs.push(bad()); f64::NAN }),
                        "skew" => p.skew = value.parse().unwrap_or_else(|_| { errs.push(bad()); f64::NAN }),
                        "seed" => p.seed = value.parse().unwrap_or_else(|_| { errs.push(bad()); 0 }),
                        "generator" if value == "power_law" => {}
                        other => errs.push(format!("line {line}: unknown key {other:?}")),
                    }
                }
            }
            if !errs.is_empty() {
                return Err(ConfigError::Invalid(errs).into());
            }
            if let Some(seed) = cli.seed {
                p.seed = seed;
            }
            let g = generate_power_law_graph(p).map_err(|e| Failure::Validation(e.to_string()))?;
            g.save_edge_list(out, false).with_context(|| format!("writing {}", out.display()))?;
            println!("wrote {} vertices, {} edges to {}", g.num_vertices(), g.num_edges(), out.display());
        }
        Command::Partition { graph, clusters, out, weighted, capacity_edges, capacity_vertices } => {
            let g = load_edge_list(graph, *weighted).context("load stage")?;
            let pmap = partition(&g, PartitionConfig::new(*clusters, *capacity_edges, *capacity_vertices)).map_err(|e| Failure::Validation(e.to_string()))?;
            let tg = build_topology_graph(&pmap, WeightMode::PaperLiteral, None).context("topology graph")?;
            fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
            pmap.write_shards_csv(fs::File::create(out.join("shards.csv")).context("shards.csv")?).context("shards.csv")?;
            pmap.write_membership_csv(fs::File::create(out.join("membership.csv")).context("membership.csv")?).context("membership.csv")?;
            tg.write_csv(fs::File::create(out.join("topology.csv")).context("topology.csv")?).context("topology.csv")?;
            println!("{} shards in {} classes written to {}", pmap.num_shards(), pmap.clusters(), out.display());
        }
        Command::Place { topology_file, grid, strategy, out, constraints, budget, restarts } => {
            let grid = parse_grid(grid, topology)?;
            let file = fs::File::open(topology_file).with_context(|| format!("opening {}", topology_file.display()))?;
            let tg = TopologyGraph::read_csv(BufReader::new(file)).map_err(|e| anyhow!(e))?;
            let problem = PlacementProblem::new(&tg, grid).with_cost_mode(cost_mode).with_constraints(*constraints);
            let seed = cli.seed.unwrap_or(1);
            let placement = match strategy {
                Strategy::Exact => solve_placement_exact(&problem, ExactOptions { branch_and_bound: true, ..Default::default() }),
                Strategy::Heuristic => solve_placement_restarts(&problem, &(0..*restarts).map(|i| seed.wrapping_add(i)).collect::<Vec<_>>(), *budget),
                Strategy::Random => random_placement(&problem, seed),
            }
            .context("placement stage")?;
            placement.write_csv(&tg, fs::File::create(out).with_context(|| format!("creating {}", out.display()))?).context("writing placement")?;
            println!("objective {}", placement.objective);
        }
        Command::Replay { trace, placement, params, out } => {
            let trace = TrafficTrace::read_csv(BufReader::new(fs::File::open(trace).with_context(|| format!("opening {}", trace.display()))?))
                .map_err(|e| anyhow!(e))?;
            let placement = Placement::read_csv(BufReader::new(fs::File::open(placement).with_context(|| format!("opening {}", placement.display()))?))
                .map_err(|e| anyhow!(e))?;
            let text = fs::read_to_string(params).with_context(|| format!("reading {}", params.display()))?;
            let noc = parse_noc_params(&text)?;
            let width = placement.coords.iter().map(|c: &Coord| c.x + 1).max().unwrap_or(1);
            let height = placement.coords.iter().map(|c| c.y + 1).max().unwrap_or(1);
            let grid = GridSpec::new(width, height, topology);
            let report = replay(&trace, &placement, &grid, cost_mode, &noc).context("replay stage")?;
            fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
            report.summary().write_csv(fs::File::create(out.join("summary.csv")).context("summary.csv")?).context("summary.csv")?;
            report.write_iterations_csv(fs::File::create(out.join("iterations.csv")).context("iterations.csv")?).context("iterations.csv")?;
            println!("avg hop {:.4}, parallel latency {} ns, energy {} pJ", report.avg_hop_count, report.parallel_latency_ns, report.energy_pj);
        }
        Command::Compare { report_a, report_b } => {
            let read = |p: &Path| -> Result<ReportSummary, Failure> {
                let f = fs::File::open(p).with_context(|| format!("opening {}", p.display()))?;
                ReportSummary::read_csv(BufReader::new(f)).map_err(|e| Failure::Runtime(anyhow!("{}: {e}", p.display())))
            };
            let c = compare(&read(report_a)?, &read(report_b)?);
            println!("speedup,energy_ratio,hop_reduction");
            println!("{},{},{}", c.speedup, c.energy_ratio, c.hop_reduction);
        }
    }
    Ok(())
}
