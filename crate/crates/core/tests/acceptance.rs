//! One check per acceptance criterion. Runs without the libtest harness so
//! every PASS/FAIL line is printed; exits non-zero if any check fails.

mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use graphnoc::config::validate_config;
use graphnoc::engine::{bfs_spec, emit_traces, pagerank_spec, run_algorithm, sssp_spec, AlgorithmSpec, Phase};
use graphnoc::graph::{generate_power_law_graph, Graph, PowerLawParams};
use graphnoc::noc::{message_latency_ns, replay, NocParams, ReportSummary};
use graphnoc::partition::{class_load_profile, edge_imbalance, partition, PartitionConfig};
use graphnoc::placement::{build_topology_graph, solve_placement_exact, Coord, CostMode, ExactOptions, GridSpec, Placement, PlacementProblem, Topology, WeightMode};
use graphnoc::engine::{Message, TrafficTrace};
use graphnoc::error::PlacementError;
use graphnoc::report::ComparisonTable;
use graphnoc::{run_experiment, ExperimentConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn demo_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/demo.conf")
}

fn load_demo(out: &Path) -> ExperimentConfig {
    let mut cfg = validate_config(&demo_config()).expect("demo config is valid");
    cfg.output_dir = out.to_path_buf();
    cfg
}

fn read_table(dir: &Path) -> ComparisonTable {
    ComparisonTable::read_csv(fs::read_to_string(dir.join("comparison.csv")).unwrap().as_bytes()).unwrap()
}

fn read_summary(path: &Path) -> ReportSummary {
    ReportSummary::read_csv(fs::read_to_string(path).unwrap().as_bytes()).unwrap()
}

fn within(elapsed: Duration, limit_s: u64) -> Result<(), String> {
    if elapsed <= Duration::from_secs(limit_s) {
        Ok(())
    } else {
        Err(format!("took {:.1} s, limit {limit_s} s", elapsed.as_secs_f64()))
    }
}

/// Exact solver equals exhaustive enumeration on 200 feasible small instances.
/// Infeasible draws along the way must be reported infeasible by both.
fn exact_solver_matches_enumeration() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut feasible, mut infeasible) = (0, 0);
    let mut mismatches = Vec::new();
    while feasible < 200 {
        let nodes = rng.gen_range(1..=8);
        let tg = common::random_topology(&mut rng, nodes);
        let (grid, mode, constraints) = common::random_setting(&mut rng, nodes);
        let problem = PlacementProblem::new(&tg, grid).with_cost_mode(mode).with_constraints(constraints);
        let got = match solve_placement_exact(&problem, ExactOptions::default()) {
            Ok(p) => Some(p.objective),
            Err(PlacementError::Infeasible { .. }) => None,
            Err(e) => return Err(format!("instance {}: {e}", feasible + infeasible)),
        };
        let want = common::exhaustive_optimum(&tg, grid, mode, constraints);
        if got != want {
            mismatches.push(format!("instance {}: solver {got:?}, enumeration {want:?}", feasible + infeasible));
        }
        if want.is_some() {
            feasible += 1;
        } else {
            infeasible += 1;
        }
    }
    within(start.elapsed(), 60)?;
    if mismatches.is_empty() {
        Ok(format!("200 feasible instances agree exactly ({infeasible} infeasible draws also agree) in {:.2} s", start.elapsed().as_secs_f64()))
    } else {
        Err(mismatches.join("; "))
    }
}

/// BFS/SSSP equal their oracles; PageRank within 1e-6 L1 of power iteration.
fn algorithms_match_oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst_pr = 0.0f64;
    for case in 0..100 {
        let n = rng.gen_range(1..=1000);
        let m = rng.gen_range(0..=4 * n);
        let edges = common::random_edges(&mut rng, n, m, 20);
        let g = Graph::from_edges(n, &edges).unwrap();
        let src = rng.gen_range(0..n as u32);
        if run_algorithm(&g, &bfs_spec(), Some(src)).unwrap().properties != common::queue_bfs(n, &edges, src) {
            return Err(format!("BFS differs on case {case}"));
        }
        if run_algorithm(&g, &sssp_spec(), Some(src)).unwrap().properties != common::dijkstra(n, &edges, src) {
            return Err(format!("SSSP differs on case {case}"));
        }
        let n = rng.gen_range(1..=200);
        let m = rng.gen_range(0..=4 * n);
        let edges = common::random_edges(&mut rng, n, m, 1);
        let g = Graph::from_edges(n, &edges).unwrap();
        let pr = run_algorithm(&g, &pagerank_spec(0.85, 1e-12, 1000), None).unwrap();
        let err = common::l1(&pr.properties, &common::dense_pagerank(n, &edges, 0.85));
        worst_pr = worst_pr.max(err);
        if err > 1e-6 {
            return Err(format!("PageRank L1 error {err:e} on case {case}"));
        }
    }
    within(start.elapsed(), 60)?;
    Ok(format!("100 graphs exact for BFS/SSSP, worst PageRank L1 {worst_pr:.2e}, {:.2} s", start.elapsed().as_secs_f64()))
}

/// Heuristic avg hop count at least 20% below the mean random baseline.
fn hop_count_reduction(demo: &Path, elapsed: Duration) -> Outcome {
    within(elapsed, 300)?;
    let table = read_table(demo);
    let mut parts = Vec::new();
    let mut ok = true;
    for row in table.rows.iter().filter(|r| r.topology == "mesh" && r.strategy == "heuristic") {
        ok &= row.hop_reduction >= 0.20;
        parts.push(format!("{} {:.1}%", row.algorithm, 100.0 * row.hop_reduction));
    }
    let line = format!("hop reduction {} (floor 20%)", parts.join(", "));
    if ok && parts.len() == 3 {
        Ok(line)
    } else {
        Err(line)
    }
}

/// Parallel-latency speedup of at least 1.5x for every algorithm.
fn parallel_speedup(demo: &Path, elapsed: Duration) -> Outcome {
    within(elapsed, 600)?;
    let table = read_table(demo);
    let mut parts = Vec::new();
    let mut ok = true;
    for row in table.rows.iter().filter(|r| r.topology == "mesh" && r.strategy == "heuristic") {
        ok &= row.speedup >= 1.5;
        parts.push(format!("{} {:.3}x", row.algorithm, row.speedup));
    }
    let line = format!("speedup {} (floor 1.5x)", parts.join(", "));
    if ok && parts.len() == 3 {
        Ok(line)
    } else {
        Err(line)
    }
}

/// With zero injection energy, energy ratios equal hop-packet ratios.
fn energy_tracks_hops() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut runs = Vec::new();
    let mut demo = load_demo(&dir.path().join("demo"));
    demo.noc.injection_energy_pj = 0.0;
    runs.push(demo.clone());
    // Both topologies and cost modes on a smaller instance.
    for (i, mode) in [CostMode::Paper, CostMode::Corrected].into_iter().enumerate() {
        let mut small = demo.clone();
        small.graph = graphnoc::config::GraphSource::PowerLaw { num_vertices: 2048, avg_degree: 6.0, skew: 1.2, seed: 9 };
        small.clusters = 4;
        small.grid_width = 5;
        small.grid_height = 5;
        small.topologies = vec![Topology::Mesh2D, Topology::FlattenedButterfly];
        small.cost_mode = mode;
        small.random_seeds = (0..8).collect();
        small.budget = 20_000;
        small.output_dir = dir.path().join(format!("small{i}"));
        runs.push(small);
    }
    let (mut checked, mut worst) = (0, 0.0f64);
    for cfg in &runs {
        let table = run_experiment(cfg).map_err(|e| format!("{e:#}"))?;
        for row in &table.rows {
            let opt = read_summary(&cfg.output_dir.join(&row.report));
            let base = read_summary(&cfg.output_dir.join(&row.baseline_report));
            if opt.total_hop_packets == 0.0 {
                continue;
            }
            let hop_ratio = base.total_hop_packets / opt.total_hop_packets;
            let rel = (row.energy_ratio - hop_ratio).abs() / hop_ratio;
            worst = worst.max(rel);
            checked += 1;
        }
    }
    let line = format!("{checked} rows over {} runs, worst relative gap {worst:.1e} (limit 1e-12)", runs.len());
    if worst <= 1e-12 && checked > 0 {
        Ok(line)
    } else {
        Err(line)
    }
}

/// Per-message latency is packets x hops x per-hop latency.
fn latency_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let grid = GridSpec::new(8, 8, Topology::Mesh2D);
    for case in 0..2000 {
        let a = Coord::new(rng.gen_range(0..8), rng.gen_range(0..8));
        let b = Coord::new(rng.gen_range(0..8), rng.gen_range(0..8));
        let params = NocParams { packet_bytes: rng.gen_range(1..=64), hop_latency_ns: rng.gen_range(1..=8) as f64 * 0.25, ..NocParams::default() };
        let bytes = rng.gen_range(1..5000u64);
        let placement = Placement::new(vec![0, 1], vec![a, b], 0.0);
        let trace = TrafficTrace { messages: vec![Message { iteration: 0, phase: Phase::Process, src_shard: 0, dst_shard: 1, bytes }] };
        let r = replay(&trace, &placement, &grid, CostMode::Paper, &params).map_err(|e| e.to_string())?;
        let packets = bytes / params.packet_bytes + u64::from(bytes % params.packet_bytes != 0);
        let hops = a.x.abs_diff(b.x) + a.y.abs_diff(b.y);
        let want = (packets * hops as u64) as f64 * params.hop_latency_ns;
        if r.serial_latency_ns != want || message_latency_ns(packets, hops, &params) != want {
            return Err(format!("case {case}: got {}, want {want}", r.serial_latency_ns));
        }
    }
    let placement = Placement::new(vec![0, 1], vec![Coord::new(0, 0), Coord::new(2, 3)], 0.0);
    let trace = TrafficTrace { messages: vec![Message { iteration: 0, phase: Phase::Process, src_shard: 0, dst_shard: 1, bytes: 8 }] };
    let r = replay(&trace, &placement, &grid, CostMode::Paper, &NocParams::default()).map_err(|e| e.to_string())?;
    if r.serial_latency_ns != 5.0 {
        return Err(format!("8-byte packet over 5 hops took {} ns", r.serial_latency_ns));
    }
    Ok("2000 random messages exact; 8 B over 5 hops at 1 ns/hop = 5 ns".into())
}

/// Partition invariants on 100 graphs x K in {1,2,4,16}; power-law imbalance at most 1.5.
fn partitioner_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for case in 0..100 {
        let n = rng.gen_range(1..=400);
        let m = rng.gen_range(0..=5 * n);
        let g = Graph::from_edges(n, &common::random_edges(&mut rng, n, m, 5)).unwrap();
        let (cap_e, cap_v) = (rng.gen_range(1..=64), rng.gen_range(1..=32));
        for k in [1, 2, 4, 16] {
            let pmap = partition(&g, PartitionConfig::new(k, cap_e, cap_v)).map_err(|e| e.to_string())?;
            common::check_partition_invariants(&g, &pmap, k).map_err(|e| format!("case {case}, K={k}: {e}"))?;
        }
    }
    let mut worst = 0.0f64;
    for seed in [1u64, 2, 3, 42] {
        let g = generate_power_law_graph(PowerLawParams { num_vertices: 1 << 14, avg_degree: 8.0, skew: 1.0, seed }).unwrap();
        let pmap = partition(&g, PartitionConfig::new(16, 1 << 20, 1 << 20)).unwrap();
        worst = worst.max(edge_imbalance(&class_load_profile(&pmap)));
    }
    let line = format!("invariants hold on 400 partitions; worst K=16 imbalance {worst:.3} (limit 1.5)");
    if worst <= 1.5 {
        Ok(line)
    } else {
        Err(line)
    }
}

/// Literal f-edges join only {1,4} with {2,3}; Process/Reduce messages map onto them.
///
/// Reduce messages whose endpoints lie in different classes cannot have an
/// f-edge (f-edges stay inside a class); they are checked at the index level
/// and counted. With K = 1 every Process and Reduce message maps strictly.
fn topology_edge_structure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut messages, mut strict, mut cross_class) = (0u64, 0u64, 0u64);
    let specs: [AlgorithmSpec; 3] = [bfs_spec(), sssp_spec(), pagerank_spec(0.85, 1e-8, 30)];
    let mut graphs: Vec<(Graph, usize, usize)> = (0..20)
        .map(|_| {
            let n = rng.gen_range(2..=300);
            let m = rng.gen_range(0..=5 * n);
            (Graph::from_edges(n, &common::random_edges(&mut rng, n, m, 9)).unwrap(), rng.gen_range(1..=64), rng.gen_range(1..=32))
        })
        .collect();
    graphs.push((generate_power_law_graph(PowerLawParams { num_vertices: 1 << 12, avg_degree: 8.0, skew: 1.0, seed: 42 }).unwrap(), 1 << 20, 1 << 20));
    for (gi, (g, cap_e, cap_v)) in graphs.iter().enumerate() {
        for k in [1usize, 2, 4, 16] {
            let pmap = partition(g, PartitionConfig::new(k, *cap_e, *cap_v)).unwrap();
            let tg = build_topology_graph(&pmap, WeightMode::PaperLiteral, None).unwrap();
            for &(a, b, _) in &tg.edges {
                let pair = (tg.nodes[a].index.min(tg.nodes[b].index), tg.nodes[a].index.max(tg.nodes[b].index));
                if pair == (1, 4) || pair == (2, 3) || !matches!(pair, (1, 2) | (1, 3) | (2, 4) | (3, 4)) {
                    return Err(format!("graph {gi}, K={k}: f-edge between indices {pair:?}"));
                }
            }
            for spec in &specs {
                let source = spec.algorithm.needs_source().then_some(0);
                let run = emit_traces(g, spec, source, &pmap).unwrap();
                for msg in run.trace.messages.iter().filter(|m| m.phase != Phase::Apply) {
                    messages += 1;
                    let (s, d) = (pmap.shard(msg.src_shard), pmap.shard(msg.dst_shard));
                    if tg.weight(msg.src_shard as usize, msg.dst_shard as usize) > 0.0 {
                        strict += 1;
                        continue;
                    }
                    let pair = (s.kind.index().min(d.kind.index()), s.kind.index().max(d.kind.index()));
                    let index_level = matches!(pair, (1, 3) | (3, 4));
                    if msg.phase == Phase::Reduce && s.class != d.class && index_level && k > 1 {
                        cross_class += 1;
                    } else {
                        return Err(format!("graph {gi}, K={k}, {}: {:?} message {}->{} has no f-edge", spec.algorithm, msg.phase, msg.src_shard, msg.dst_shard));
                    }
                }
            }
        }
    }
    Ok(format!(
        "no (1,4)/(2,3) f-edges; {strict}/{messages} Process/Reduce messages on an f-edge, {cross_class} cross-class Reduce messages index-consistent"
    ))
}

/// Process and Reduce within 2x, Apply at most 5% of Process, PageRank above BFS.
fn data_movement_shape(demo: &Path) -> Outcome {
    let text = fs::read_to_string(demo.join("data_movement.csv")).unwrap();
    let mut rows = Vec::new();
    for line in text.lines().skip(1) {
        let c: Vec<&str> = line.split(',').collect();
        let v: Vec<f64> = c[1..].iter().map(|x| x.parse().unwrap()).collect();
        rows.push((c[0].to_string(), [v[0], v[1], v[2]]));
    }
    let mut ok = rows.len() == 3;
    let mut parts = Vec::new();
    for (alg, [p, r, a]) in &rows {
        let spread = p.max(*r) / p.min(*r);
        ok &= spread <= 2.0 && *a <= 0.05 * p;
        parts.push(format!("{alg} R/P {:.2} A/P {:.3}", r / p, a / p));
    }
    let total = |name: &str| rows.iter().find(|(a, _)| a == name).map(|(_, v)| v.iter().sum::<f64>()).unwrap_or(f64::NAN);
    ok &= total("pagerank") > total("bfs");
    let line = format!("{}; total PR {:.2} vs BFS {:.2}", parts.join(", "), total("pagerank"), total("bfs"));
    if ok {
        Ok(line)
    } else {
        Err(line)
    }
}

/// Two CLI runs of the demo config produce byte-identical trees.
fn reproducible_runs() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut roots = Vec::new();
    for name in ["first", "second"] {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_graphnoc"))
            .args(["run", demo_config().to_str().unwrap(), "--output-dir", out.to_str().unwrap()])
            .output()
            .unwrap();
        if !status.status.success() {
            return Err(format!("run failed: {}", String::from_utf8_lossy(&status.stderr)));
        }
        roots.push(out);
    }
    let files = common::files_under(&roots[0]);
    if files != common::files_under(&roots[1]) {
        return Err("file sets differ".into());
    }
    for f in &files {
        if fs::read(roots[0].join(f)).unwrap() != fs::read(roots[1].join(f)).unwrap() {
            return Err(format!("{} differs", f.display()));
        }
    }
    Ok(format!("{} files identical", files.len()))
}

fn main() -> ExitCode {
    let demo_dir = tempfile::tempdir().unwrap();
    let demo = demo_dir.path().join("demo");
    let start = Instant::now();
    let demo_run = run_experiment(&load_demo(&demo)).map_err(|e| format!("demo run failed: {e:#}"));
    let demo_elapsed = start.elapsed();
    let (demo_run, demo) = (&demo_run, demo.as_path());
    let on_demo = |check: fn(&Path, Duration) -> Outcome| move || demo_run.clone().and_then(|_| check(demo, demo_elapsed));
    let criteria: Vec<(u32, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (1, Box::new(exact_solver_matches_enumeration)),
        (2, Box::new(algorithms_match_oracles)),
        (3, Box::new(on_demo(hop_count_reduction))),
        (4, Box::new(on_demo(parallel_speedup))),
        (5, Box::new(energy_tracks_hops)),
        (6, Box::new(latency_law)),
        (7, Box::new(partitioner_properties)),
        (8, Box::new(topology_edge_structure)),
        (9, Box::new(on_demo(|d, _| data_movement_shape(d)))),
        (10, Box::new(reproducible_runs)),
    ];
    let mut failed = 0;
    for (n, check) in &criteria {
        match check() {
            Ok(detail) => println!("criterion {n}: PASS {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n}: FAIL {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
