//! End-to-end pipeline: load, partition, execute, place, replay, compare.
//!
//! All artifacts are written under `<output>.partial` and renamed into place
//! once every stage has succeeded; a failed run leaves no output behind.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;

use crate::config::{Colocation, ExperimentConfig, GraphSource, SourceVertex, Strategy};
use crate::engine::{bfs_spec, emit_traces_with, normalized_data_movement, pagerank_spec, sssp_spec, Algorithm, AlgorithmSpec, EngineOptions, TrafficTrace};
use crate::graph::{generate_power_law_graph, load_edge_list, Graph, PowerLawParams};
use crate::noc::{compare, geometric_mean, replay, ReportSummary, SimReport};
use crate::partition::{partition, PartitionConfig, PartitionMap};
use crate::placement::{
    build_topology_graph, random_placement, solve_placement_exact, solve_placement_restarts, ExactOptions, GridSpec, Placement, PlacementProblem, Topology,
    TopologyGraph,
};
use crate::report::{BarChart, ComparisonRow, ComparisonTable};

/// Short identifier of the configured graph, used in table rows.
pub fn graph_name(cfg: &ExperimentConfig) -> String {
    match &cfg.graph {
        GraphSource::File { path, .. } => path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "graph".into()),
        GraphSource::PowerLaw { num_vertices, avg_degree, skew, seed } => format!("powerlaw-n{num_vertices}-d{avg_degree}-a{skew}-s{seed}"),
    }
}

pub fn load_graph(cfg: &ExperimentConfig) -> Result<Graph> {
    Ok(match &cfg.graph {
        GraphSource::File { path, weighted } => load_edge_list(path, *weighted)?,
        GraphSource::PowerLaw { num_vertices, avg_degree, skew, seed } => {
            generate_power_law_graph(PowerLawParams { num_vertices: *num_vertices, avg_degree: *avg_degree, skew: *skew, seed: *seed })?
        }
    })
}

pub fn algorithm_spec(cfg: &ExperimentConfig, algorithm: Algorithm) -> AlgorithmSpec {
    match algorithm {
        Algorithm::Bfs => bfs_spec(),
        Algorithm::Sssp => sssp_spec(),
        Algorithm::PageRank => pagerank_spec(cfg.damping, cfg.epsilon, cfg.max_iterations),
    }
}

pub fn build_partition(cfg: &ExperimentConfig, g: &Graph) -> Result<PartitionMap> {
    let pconf = PartitionConfig { modulo: cfg.modulo, ..PartitionConfig::new(cfg.clusters, cfg.capacity_edges, cfg.capacity_vertices) };
    let pmap = partition(g, pconf)?;
    Ok(match cfg.colocation {
        Colocation::None => pmap,
        Colocation::Class => {
            let nodes = pmap.shards().iter().map(|s| s.class).collect();
            pmap.with_colocation(nodes)
        }
    })
}

/// Graph used for `algorithm`: SSSP gets seeded random weights on unweighted inputs.
fn graph_for<'a>(g: &'a Graph, weighted: &'a Option<Graph>, algorithm: Algorithm) -> &'a Graph {
    match (algorithm, weighted) {
        (Algorithm::Sssp, Some(w)) => w,
        _ => g,
    }
}

pub fn resolve_source(cfg: &ExperimentConfig, pmap: &PartitionMap, algorithm: Algorithm) -> Option<u32> {
    if !algorithm.needs_source() {
        return None;
    }
    match cfg.source {
        SourceVertex::Auto => pmap.sorted_order().first().copied(),
        SourceVertex::Id(v) => Some(v),
    }
}

/// A placed layout and its replay.
struct Evaluated {
    placement: Placement,
    report: SimReport,
}

fn place(cfg: &ExperimentConfig, problem: &PlacementProblem<'_>, strategy: Strategy, seed: u64) -> Result<Placement> {
    Ok(match strategy {
        Strategy::Exact => solve_placement_exact(problem, ExactOptions { exhaustive_cells: cfg.exact_threshold, branch_and_bound: cfg.branch_and_bound })?,
        Strategy::Heuristic => {
            let seeds: Vec<u64> = (0..cfg.restarts as u64).map(|i| cfg.seed.wrapping_add(i)).collect();
            solve_placement_restarts(problem, &seeds, cfg.budget)?
        }
        Strategy::Random => random_placement(problem, seed)?,
    })
}

fn evaluate(cfg: &ExperimentConfig, problem: &PlacementProblem<'_>, trace: &TrafficTrace, strategy: Strategy, seed: u64) -> Result<Evaluated> {
    let placement = place(cfg, problem, strategy, seed).with_context(|| format!("placement stage ({strategy})"))?;
    let report = replay(trace, &placement, &problem.grid, cfg.cost_mode, &cfg.noc).with_context(|| format!("replay stage ({strategy})"))?;
    Ok(Evaluated { placement, report })
}

struct Writer {
    root: PathBuf,
}

impl Writer {
    fn file(&self, rel: &str, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        let mut out = BufWriter::new(fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        body(&mut out).with_context(|| format!("writing {}", path.display()))?;
        out.flush().with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }

    fn report(&self, stem: &str, report: &SimReport) -> Result<String> {
        let rel = format!("reports/{stem}.csv");
        self.file(&rel, |w| report.summary().write_csv(w))?;
        self.file(&format!("reports/{stem}_iterations.csv"), |w| report.write_iterations_csv(w))?;
        Ok(rel)
    }

    fn placement(&self, stem: &str, placement: &Placement, tg: &TopologyGraph) -> Result<()> {
        self.file(&format!("placements/{stem}.csv"), |w| placement.write_csv(tg, w))
    }
}

/// Runs the whole pipeline and writes artifacts to `cfg.output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ComparisonTable> {
    let out = cfg.output_dir.clone();
    let partial = partial_dir(&out);
    if partial.exists() {
        fs::remove_dir_all(&partial).with_context(|| format!("removing stale {}", partial.display()))?;
    }
    fs::create_dir_all(&partial).with_context(|| format!("creating {}", partial.display()))?;
    match run_into(cfg, &partial) {
        Ok(table) => {
            if out.exists() {
                fs::remove_dir_all(&out).with_context(|| format!("replacing {}", out.display()))?;
            }
            fs::rename(&partial, &out).with_context(|| format!("moving results to {}", out.display()))?;
            Ok(table)
        }
        Err(e) => {
            let _ = fs::remove_dir_all(&partial);
            Err(e)
        }
    }
}

fn partial_dir(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_else(|| "out".into());
    name.push(".partial");
    out.with_file_name(name)
}

fn run_into(cfg: &ExperimentConfig, root: &Path) -> Result<ComparisonTable> {
    let w = Writer { root: root.to_path_buf() };
    // The echoed config omits the output location so trees compare across directories.
    let echoed = ExperimentConfig { output_dir: PathBuf::from("."), ..cfg.clone() };
    w.file("config.conf", |f| f.write_all(echoed.canonical().as_bytes()))?;

    let g = load_graph(cfg).context("load stage")?;
    let weighted = match (&cfg.graph, cfg.sssp_max_weight) {
        (GraphSource::File { weighted: true, .. }, _) | (_, 0) => None,
        (_, max) => Some(g.with_random_weights(cfg.weight_seed, max)),
    };
    let pmap = build_partition(cfg, &g).context("partition stage")?;
    w.file("partition/shards.csv", |f| pmap.write_shards_csv(f))?;
    w.file("partition/membership.csv", |f| pmap.write_membership_csv(f))?;

    let name = graph_name(cfg);
    let mut table = ComparisonTable::default();
    let mut movement: Vec<(Algorithm, [f64; 3])> = Vec::new();
    let opts = EngineOptions { reduce_all_vertices: cfg.reduce_all_vertices, reduce_order_seed: None };

    for &algorithm in &cfg.algorithms {
        let graph = graph_for(&g, &weighted, algorithm);
        let spec = algorithm_spec(cfg, algorithm);
        let source = resolve_source(cfg, &pmap, algorithm);
        let run = emit_traces_with(graph, &spec, source, &pmap, opts).with_context(|| format!("engine stage ({algorithm})"))?;
        w.file(&format!("traces/{algorithm}.csv"), |f| run.trace.write_csv(f))?;
        movement.push((algorithm, normalized_data_movement(&run.trace, graph)));

        let tg = build_topology_graph(&pmap, cfg.weights, Some(&run.trace)).with_context(|| format!("placement stage ({algorithm})"))?;
        w.file(&format!("topology/{algorithm}.csv"), |f| tg.write_csv(f))?;

        for &topology in &cfg.topologies {
            let grid = GridSpec::new(cfg.grid_width, cfg.grid_height, topology);
            let problem = PlacementProblem::new(&tg, grid).with_cost_mode(cfg.cost_mode).with_constraints(cfg.constraints);
            let group = format!("{algorithm}_{topology}");

            let randoms: Vec<Result<Evaluated>> =
                cfg.random_seeds.par_iter().map(|&seed| evaluate(cfg, &problem, &run.trace, Strategy::Random, seed)).collect();
            let mut summaries = Vec::with_capacity(randoms.len());
            for (seed, r) in cfg.random_seeds.iter().zip(randoms) {
                let r = r?;
                let stem = format!("{group}_random_s{seed}");
                w.placement(&stem, &r.placement, &tg)?;
                w.report(&stem, &r.report)?;
                summaries.push(r.report.summary());
            }
            let baseline = ReportSummary::mean(&summaries);
            let baseline_rel = format!("reports/{group}_random_mean.csv");
            w.file(&baseline_rel, |f| baseline.write_csv(f))?;

            let row = |strategy: &str, s: &ReportSummary, report: String| {
                let c = compare(s, &baseline);
                ComparisonRow {
                    graph: name.clone(),
                    algorithm: algorithm.to_string(),
                    topology: topology.to_string(),
                    strategy: strategy.to_string(),
                    avg_hop: s.avg_hop_count,
                    serial_latency_ns: s.serial_latency_ns,
                    parallel_latency_ns: s.parallel_latency_ns,
                    energy_pj: s.energy_pj,
                    speedup: c.speedup,
                    energy_ratio: c.energy_ratio,
                    hop_reduction: c.hop_reduction,
                    report,
                    baseline_report: baseline_rel.clone(),
                }
            };
            table.rows.push(row("random", &baseline, baseline_rel.clone()));
            for &strategy in &cfg.strategies {
                let r = evaluate(cfg, &problem, &run.trace, strategy, cfg.seed)?;
                let stem = format!("{group}_{strategy}");
                w.placement(&stem, &r.placement, &tg)?;
                let rel = w.report(&stem, &r.report)?;
                table.rows.push(row(strategy.name(), &r.report.summary(), rel));
            }
        }
    }

    w.file("comparison.csv", |f| table.write_csv(f))?;
    w.file("data_movement.csv", |f| {
        writeln!(f, "algorithm,process,reduce,apply")?;
        for (a, m) in &movement {
            writeln!(f, "{a},{},{},{}", m[0], m[1], m[2])?;
        }
        Ok(())
    })?;
    write_summary(&w, cfg, &table)?;
    write_charts(&w, cfg, &table, &movement).context("report stage")?;
    Ok(table)
}

/// Geometric means of the ratios across algorithms, per topology and strategy.
fn write_summary(w: &Writer, cfg: &ExperimentConfig, table: &ComparisonTable) -> Result<()> {
    w.file("summary.csv", |f| {
        writeln!(f, "topology,strategy,geomean_speedup,geomean_energy_ratio,mean_hop_reduction")?;
        for topology in &cfg.topologies {
            for strategy in &cfg.strategies {
                let rows: Vec<&ComparisonRow> =
                    table.rows.iter().filter(|r| r.topology == topology.name() && r.strategy == strategy.name()).collect();
                let speed: Vec<f64> = rows.iter().map(|r| r.speedup).collect();
                let energy: Vec<f64> = rows.iter().map(|r| r.energy_ratio).collect();
                let hop = rows.iter().map(|r| r.hop_reduction).sum::<f64>() / rows.len().max(1) as f64;
                writeln!(f, "{topology},{strategy},{},{},{hop}", geometric_mean(&speed), geometric_mean(&energy))?;
            }
        }
        Ok(())
    })
}

fn write_charts(w: &Writer, cfg: &ExperimentConfig, table: &ComparisonTable, movement: &[(Algorithm, [f64; 3])]) -> Result<()> {
    let groups: Vec<(String, String)> = cfg
        .algorithms
        .iter()
        .flat_map(|a| cfg.topologies.iter().map(move |t: &Topology| (a.to_string(), t.to_string())))
        .collect();
    let categories: Vec<String> = groups.iter().map(|(a, t)| format!("{a}/{t}")).collect();
    let lookup = |group: &(String, String), strategy: &str, field: fn(&ComparisonRow) -> f64| {
        table
            .rows
            .iter()
            .find(|r| r.algorithm == group.0 && r.topology == group.1 && r.strategy == strategy)
            .map(field)
            .unwrap_or(f64::NAN)
    };
    let series_for = |strategies: &[&str], field: fn(&ComparisonRow) -> f64| -> Vec<(String, Vec<f64>)> {
        strategies.iter().map(|s| (s.to_string(), groups.iter().map(|g| lookup(g, s, field)).collect())).collect()
    };
    let optimizing: Vec<&str> = cfg.strategies.iter().map(|s| s.name()).collect();
    let mut with_random = vec!["random"];
    with_random.extend(optimizing.iter().copied());

    let charts = [
        (
            "charts/hop_count.svg",
            BarChart { title: "Average hop count".into(), y_label: "hops per packet".into(), categories: categories.clone(), series: series_for(&with_random, |r| r.avg_hop) },
        ),
        (
            "charts/speedup.svg",
            BarChart { title: "Speedup over random placement".into(), y_label: "speedup (x)".into(), categories: categories.clone(), series: series_for(&optimizing, |r| r.speedup) },
        ),
        (
            "charts/energy.svg",
            BarChart {
                title: "Energy reduction over random placement".into(),
                y_label: "energy ratio (x)".into(),
                categories: categories.clone(),
                series: series_for(&optimizing, |r| r.energy_ratio),
            },
        ),
        (
            "charts/data_movement.svg",
            BarChart {
                title: "Normalized data movement per phase".into(),
                y_label: "bytes / graph size".into(),
                categories: movement.iter().map(|(a, _)| a.to_string()).collect(),
                series: ["process", "reduce", "apply"].iter().enumerate().map(|(i, p)| (p.to_string(), movement.iter().map(|(_, m)| m[i]).collect())).collect(),
            },
        ),
    ];
    for (rel, chart) in charts {
        w.file(rel, |f| f.write_all(chart.to_svg().as_bytes()))?;
    }
    Ok(())
}
