//! Python bindings for the graph/NoC co-simulation pipeline.

use std::path::PathBuf;
use std::str::FromStr;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use graphnoc::config::{validate_config, ConfigError, Strategy};
use graphnoc::engine::{bfs_spec, emit_traces, pagerank_spec, run_algorithm, sssp_spec, Algorithm, AlgorithmSpec};
use graphnoc::graph::{degree_histogram, fit_power_law, generate_power_law_graph, load_edge_list, top_vertex_edge_share, DegreeDirection, PowerLawParams};
use graphnoc::noc::{compare as compare_summaries, replay as replay_trace, NocParams};
use graphnoc::partition::{class_load_profile, edge_imbalance, partition as partition_graph, PartitionConfig};
use graphnoc::placement::{
    build_topology_graph, random_placement, solve_placement_exact, solve_placement_restarts, ConstraintMode, CostMode, ExactOptions, GridSpec,
    PlacementProblem, Topology, WeightMode,
};

fn value_err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse<T: FromStr<Err = String>>(s: &str) -> PyResult<T> {
    T::from_str(s).map_err(PyValueError::new_err)
}

#[pyclass(module = "graphnoc_py", name = "Graph", frozen)]
struct PyGraph(graphnoc::Graph);

#[pymethods]
impl PyGraph {
    /// Builds a graph from `(src, dst, weight)` triples.
    #[new]
    fn new(num_vertices: usize, edges: Vec<(u32, u32, f64)>) -> PyResult<Self> {
        graphnoc::Graph::from_edges(num_vertices, &edges).map(Self).map_err(value_err)
    }

    #[staticmethod]
    #[pyo3(signature = (num_vertices, avg_degree = 8.0, skew = 1.0, seed = 42))]
    fn power_law(num_vertices: usize, avg_degree: f64, skew: f64, seed: u64) -> PyResult<Self> {
        generate_power_law_graph(PowerLawParams { num_vertices, avg_degree, skew, seed }).map(Self).map_err(value_err)
    }

    #[staticmethod]
    #[pyo3(signature = (path, weighted = false))]
    fn load(path: PathBuf, weighted: bool) -> PyResult<Self> {
        load_edge_list(&path, weighted).map(Self).map_err(value_err)
    }

    #[getter]
    fn num_vertices(&self) -> usize {
        self.0.num_vertices()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.0.num_edges()
    }

    fn out_degree(&self, v: u32) -> PyResult<usize> {
        if (v as usize) < self.0.num_vertices() {
            Ok(self.0.out_degree(v))
        } else {
            Err(value_err(format!("vertex {v} out of range")))
        }
    }

    /// Fraction of edges owned by the top `fraction` of vertices by out-degree.
    fn top_edge_share(&self, fraction: f64) -> PyResult<f64> {
        top_vertex_edge_share(&self.0, fraction).map_err(value_err)
    }

    /// Fitted exponent of the out-degree power law.
    fn fit_alpha(&self) -> PyResult<f64> {
        fit_power_law(&degree_histogram(&self.0, DegreeDirection::Out)).map(|f| f.alpha).map_err(value_err)
    }

    /// Copy with seeded integer weights in `[1, max_weight]`.
    fn with_random_weights(&self, seed: u64, max_weight: u32) -> Self {
        Self(self.0.with_random_weights(seed, max_weight))
    }

    fn __repr__(&self) -> String {
        format!("Graph(num_vertices={}, num_edges={})", self.0.num_vertices(), self.0.num_edges())
    }
}

#[pyclass(module = "graphnoc_py", name = "PartitionMap", frozen)]
struct PyPartitionMap(graphnoc::PartitionMap);

#[pymethods]
impl PyPartitionMap {
    #[getter]
    fn num_shards(&self) -> usize {
        self.0.num_shards()
    }

    #[getter]
    fn clusters(&self) -> usize {
        self.0.clusters()
    }

    /// Max over mean class edge count.
    fn imbalance(&self) -> f64 {
        edge_imbalance(&class_load_profile(&self.0))
    }

    /// `(id, index, class, rank, size)` per shard.
    fn shards(&self) -> Vec<(u32, u8, u32, u32, usize)> {
        self.0.shards().iter().map(|s| (s.id, s.kind.index(), s.class, s.rank, s.size())).collect()
    }

    fn __repr__(&self) -> String {
        format!("PartitionMap(clusters={}, num_shards={})", self.0.clusters(), self.0.num_shards())
    }
}

#[pyfunction]
#[pyo3(signature = (graph, clusters, capacity_edges = 1 << 20, capacity_vertices = 1 << 20))]
fn partition(graph: &PyGraph, clusters: usize, capacity_edges: usize, capacity_vertices: usize) -> PyResult<PyPartitionMap> {
    partition_graph(&graph.0, PartitionConfig::new(clusters, capacity_edges, capacity_vertices)).map(PyPartitionMap).map_err(value_err)
}

fn spec_for(algorithm: &str, damping: f64, epsilon: f64, max_iterations: usize) -> PyResult<AlgorithmSpec> {
    Ok(match parse::<Algorithm>(algorithm)? {
        Algorithm::Bfs => bfs_spec(),
        Algorithm::Sssp => sssp_spec(),
        Algorithm::PageRank => pagerank_spec(damping, epsilon, max_iterations),
    })
}

/// Vertex properties after running `algorithm` to convergence.
#[pyfunction]
#[pyo3(signature = (graph, algorithm, source = None, damping = 0.85, epsilon = 1e-6, max_iterations = 20))]
fn run(graph: &PyGraph, algorithm: &str, source: Option<u32>, damping: f64, epsilon: f64, max_iterations: usize) -> PyResult<Vec<f64>> {
    let spec = spec_for(algorithm, damping, epsilon, max_iterations)?;
    run_algorithm(&graph.0, &spec, source).map(|out| out.properties).map_err(value_err)
}

#[pyclass(module = "graphnoc_py", name = "Trace", frozen)]
struct PyTrace(graphnoc::TrafficTrace);

#[pymethods]
impl PyTrace {
    fn __len__(&self) -> usize {
        self.0.messages.len()
    }

    /// Bytes sent in the Process, Reduce and Apply phases.
    fn phase_bytes(&self) -> [u64; 3] {
        self.0.phase_bytes()
    }

    #[getter]
    fn iterations(&self) -> u32 {
        self.0.iterations()
    }

    /// `(iteration, phase, src_shard, dst_shard, bytes)` per message.
    fn messages(&self) -> Vec<(u32, &'static str, u32, u32, u64)> {
        self.0.messages.iter().map(|m| (m.iteration, m.phase.name(), m.src_shard, m.dst_shard, m.bytes)).collect()
    }

    fn write_csv(&self, path: PathBuf) -> PyResult<()> {
        let file = std::fs::File::create(&path).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        self.0.write_csv(std::io::BufWriter::new(file)).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }
}

/// Runs `algorithm` over a partitioned graph; returns properties and the message trace.
#[pyfunction]
#[pyo3(signature = (graph, pmap, algorithm, source = None, damping = 0.85, epsilon = 1e-6, max_iterations = 20))]
fn trace(
    graph: &PyGraph,
    pmap: &PyPartitionMap,
    algorithm: &str,
    source: Option<u32>,
    damping: f64,
    epsilon: f64,
    max_iterations: usize,
) -> PyResult<(Vec<f64>, PyTrace)> {
    let spec = spec_for(algorithm, damping, epsilon, max_iterations)?;
    let run = emit_traces(&graph.0, &spec, source, &pmap.0).map_err(value_err)?;
    Ok((run.properties, PyTrace(run.trace)))
}

#[pyclass(module = "graphnoc_py", name = "TopologyGraph", frozen)]
struct PyTopologyGraph(graphnoc::placement::TopologyGraph);

#[pymethods]
impl PyTopologyGraph {
    #[getter]
    fn num_nodes(&self) -> usize {
        self.0.nodes.len()
    }

    /// `(node_a, node_b, weight)` per affinity edge.
    fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.0.edges.clone()
    }
}

/// Affinity graph over shards; `weights` is "paper" or "traffic" (needs `trace`).
#[pyfunction]
#[pyo3(signature = (pmap, weights = "paper", trace = None))]
fn topology_graph(pmap: &PyPartitionMap, weights: &str, trace: Option<&PyTrace>) -> PyResult<PyTopologyGraph> {
    build_topology_graph(&pmap.0, parse::<WeightMode>(weights)?, trace.map(|t| &t.0)).map(PyTopologyGraph).map_err(value_err)
}

#[pyclass(module = "graphnoc_py", name = "Placement", frozen)]
struct PyPlacement {
    inner: graphnoc::Placement,
    grid: GridSpec,
    cost_mode: CostMode,
}

#[pymethods]
impl PyPlacement {
    #[getter]
    fn objective(&self) -> f64 {
        self.inner.objective
    }

    /// `(shard, x, y)` per placed shard.
    fn coords(&self) -> Vec<(u32, u32, u32)> {
        self.inner.shards.iter().zip(&self.inner.coords).map(|(&s, c)| (s, c.x, c.y)).collect()
    }
}

/// Places a topology graph on a `width` x `height` grid.
#[pyfunction]
#[pyo3(signature = (graph, width, height, strategy = "heuristic", topology = "mesh", cost_mode = "paper", constraints = "strict", seed = 1, budget = 200_000, restarts = 4))]
#[allow(clippy::too_many_arguments)]
fn place(
    graph: &PyTopologyGraph,
    width: u32,
    height: u32,
    strategy: &str,
    topology: &str,
    cost_mode: &str,
    constraints: &str,
    seed: u64,
    budget: usize,
    restarts: u64,
) -> PyResult<PyPlacement> {
    let grid = GridSpec::new(width, height, parse::<Topology>(topology)?);
    let mode = parse::<CostMode>(cost_mode)?;
    let problem = PlacementProblem::new(&graph.0, grid).with_cost_mode(mode).with_constraints(parse::<ConstraintMode>(constraints)?);
    let seeds: Vec<u64> = (0..restarts.max(1)).map(|i| seed.wrapping_add(i)).collect();
    let inner = match parse::<Strategy>(strategy)? {
        Strategy::Exact => solve_placement_exact(&problem, ExactOptions { branch_and_bound: true, ..Default::default() }),
        Strategy::Heuristic => solve_placement_restarts(&problem, &seeds, budget),
        Strategy::Random => random_placement(&problem, seed),
    }
    .map_err(value_err)?;
    Ok(PyPlacement { inner, grid, cost_mode: mode })
}

#[pyclass(module = "graphnoc_py", name = "Summary", frozen, get_all)]
struct PySummary {
    total_packets: f64,
    total_hop_packets: f64,
    avg_hop_count: f64,
    serial_latency_ns: f64,
    parallel_latency_ns: f64,
    energy_pj: f64,
}

impl From<graphnoc::ReportSummary> for PySummary {
    fn from(s: graphnoc::ReportSummary) -> Self {
        Self {
            total_packets: s.total_packets,
            total_hop_packets: s.total_hop_packets,
            avg_hop_count: s.avg_hop_count,
            serial_latency_ns: s.serial_latency_ns,
            parallel_latency_ns: s.parallel_latency_ns,
            energy_pj: s.energy_pj,
        }
    }
}

impl From<&PySummary> for graphnoc::ReportSummary {
    fn from(s: &PySummary) -> Self {
        Self {
            total_packets: s.total_packets,
            total_hop_packets: s.total_hop_packets,
            avg_hop_count: s.avg_hop_count,
            serial_latency_ns: s.serial_latency_ns,
            parallel_latency_ns: s.parallel_latency_ns,
            energy_pj: s.energy_pj,
        }
    }
}

#[pymethods]
impl PySummary {
    fn __repr__(&self) -> String {
        format!(
            "Summary(avg_hop_count={}, parallel_latency_ns={}, energy_pj={})",
            self.avg_hop_count, self.parallel_latency_ns, self.energy_pj
        )
    }
}

/// Replays a trace over a placement, on the placement's grid and cost mode.
#[pyfunction]
#[pyo3(signature = (trace, placement, packet_bytes = 8, hop_latency_ns = 1.0, hop_energy_pj = 0.1, injection_energy_pj = 0.05))]
fn replay(trace: &PyTrace, placement: &PyPlacement, packet_bytes: u64, hop_latency_ns: f64, hop_energy_pj: f64, injection_energy_pj: f64) -> PyResult<PySummary> {
    let params = NocParams { packet_bytes, hop_latency_ns, hop_energy_pj, injection_energy_pj, ..NocParams::default() };
    replay_trace(&trace.0, &placement.inner, &placement.grid, placement.cost_mode, &params).map(|r| r.summary().into()).map_err(value_err)
}

/// `(speedup, energy_ratio, hop_reduction)` of `optimized` against `baseline`.
#[pyfunction]
fn compare(optimized: &PySummary, baseline: &PySummary) -> (f64, f64, f64) {
    let c = compare_summaries(&optimized.into(), &baseline.into());
    (c.speedup, c.energy_ratio, c.hop_reduction)
}

fn config_err(e: ConfigError) -> PyErr {
    match e {
        ConfigError::Unreadable { .. } => PyRuntimeError::new_err(e.to_string()),
        other => value_err(other),
    }
}

/// Canonical text of a valid config; raises ValueError listing every violation.
#[pyfunction]
fn validate(path: PathBuf) -> PyResult<String> {
    validate_config(&path).map(|cfg| cfg.canonical()).map_err(config_err)
}

/// `(algorithm, topology, strategy, avg_hop, speedup, energy_ratio, hop_reduction)`.
type Row = (String, String, String, f64, f64, f64, f64);

/// Runs a full experiment; returns one [`Row`] per comparison-table row.
#[pyfunction]
#[pyo3(signature = (config, output_dir = None))]
fn run_experiment(py: Python<'_>, config: PathBuf, output_dir: Option<PathBuf>) -> PyResult<Vec<Row>> {
    let mut cfg = validate_config(&config).map_err(config_err)?;
    if let Some(dir) = output_dir {
        cfg.output_dir = dir;
    }
    let table = py.detach(|| graphnoc::run_experiment(&cfg)).map_err(|e| PyRuntimeError::new_err(format!("{e:#}")))?;
    Ok(table
        .rows
        .into_iter()
        .map(|r| (r.algorithm, r.topology, r.strategy, r.avg_hop, r.speedup, r.energy_ratio, r.hop_reduction))
        .collect())
}

#[pymodule]
fn graphnoc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyPartitionMap>()?;
    m.add_class::<PyTrace>()?;
    m.add_class::<PyTopologyGraph>()?;
    m.add_class::<PyPlacement>()?;
    m.add_class::<PySummary>()?;
    m.add_function(wrap_pyfunction!(partition, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(trace, m)?)?;
    m.add_function(wrap_pyfunction!(topology_graph, m)?)?;
    m.add_function(wrap_pyfunction!(place, m)?)?;
    m.add_function(wrap_pyfunction!(replay, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
