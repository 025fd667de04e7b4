//! Vertex-centric Process / Reduce / Apply execution with shard-level traffic
//! accounting.
//!
//! Every iteration runs three phases in order:
//!
//! * **Process**: each active vertex `u` pushes `process(u.prop, edge)` into
//!   the edge property of each out-edge. Traffic: one word from every Edge
//!   Table shard holding `u`'s out-edges to `u`'s Vertex Prop shard, then one
//!   word per out-edge from that Vertex Prop shard to the edge's Edge Prop
//!   shard.
//! * **Reduce**: every vertex with at least one fresh in-edge folds those edge
//!   properties into its temp. Traffic: per fresh in-edge, one word Edge Table
//!   to Vertex Temp and one word Edge Prop to Vertex Temp.
//! * **Apply**: `prop = apply(temp, prop)`. Traffic: one word Vertex Temp to
//!   Vertex Prop for every vertex whose property changed and that received a
//!   fresh temp.
//!
//! Messages between co-located shards are local and not traced. Traced words
//! are coalesced per `(iteration, phase, src, dst)` flow.

use std::collections::HashMap;
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::EngineError;
use crate::graph::{EdgeId, Graph, VertexId};
use crate::partition::{PartitionMap, ShardId};

/// Property word size in bytes (64-bit words).
pub const WORD_BYTES: u64 = 8;

pub const DEFAULT_DAMPING: f64 = 0.85;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Bfs,
    Sssp,
    PageRank,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Self::Bfs => "bfs",
            Self::Sssp => "sssp",
            Self::PageRank => "pagerank",
        }
    }

    pub fn needs_source(self) -> bool {
        !matches!(self, Self::PageRank)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bfs" => Ok(Self::Bfs),
            "sssp" => Ok(Self::Sssp),
            "pagerank" | "pr" => Ok(Self::PageRank),
            other => Err(format!("unknown algorithm {other:?}")),
        }
    }
}

/// The per-algorithm Process / Reduce / Apply functions and run parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgorithmSpec {
    pub algorithm: Algorithm,
    pub damping: f64,
    pub epsilon: f64,
    pub max_iterations: usize,
}

pub fn bfs_spec() -> AlgorithmSpec {
    AlgorithmSpec { algorithm: Algorithm::Bfs, damping: 0.0, epsilon: 0.0, max_iterations: usize::MAX }
}

pub fn sssp_spec() -> AlgorithmSpec {
    AlgorithmSpec { algorithm: Algorithm::Sssp, damping: 0.0, epsilon: 0.0, max_iterations: usize::MAX }
}

pub fn pagerank_spec(damping: f64, epsilon: f64, max_iterations: usize) -> AlgorithmSpec {
    AlgorithmSpec { algorithm: Algorithm::PageRank, damping, epsilon, max_iterations }
}

impl AlgorithmSpec {
    /// Edge property pushed along an out-edge of a vertex with property
    /// `src_prop` and out-degree `src_out_degree`.
    pub fn process(&self, src_prop: f64, weight: f64, src_out_degree: usize) -> f64 {
        match self.algorithm {
            Algorithm::Bfs => src_prop + 1.0,
            Algorithm::Sssp => src_prop + weight,
            Algorithm::PageRank => src_prop / src_out_degree as f64,
        }
    }

    pub fn reduce(&self, acc: f64, edge_prop: f64) -> f64 {
        match self.algorithm {
            Algorithm::Bfs | Algorithm::Sssp => acc.min(edge_prop),
            Algorithm::PageRank => acc + edge_prop,
        }
    }

    pub fn reduce_identity(&self) -> f64 {
        match self.algorithm {
            Algorithm::Bfs | Algorithm::Sssp => f64::INFINITY,
            Algorithm::PageRank => 0.0,
        }
    }

    /// Min-based applies. PageRank's apply also needs the dangling mass and
    /// vertex count, see [`AlgorithmSpec::apply_rank`].
    pub fn apply(&self, temp: f64, prop: f64) -> f64 {
        prop.min(temp)
    }

    pub fn apply_rank(&self, accumulated: f64, dangling_mass: f64, num_vertices: usize) -> f64 {
        let n = num_vertices as f64;
        (1.0 - self.damping) / n + self.damping * (accumulated + dangling_mass / n)
    }

    pub fn initial_property(&self, v: VertexId, source: Option<VertexId>, num_vertices: usize) -> f64 {
        match self.algorithm {
            Algorithm::Bfs | Algorithm::Sssp => {
                if Some(v) == source {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Algorithm::PageRank => 1.0 / num_vertices as f64,
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.algorithm == Algorithm::PageRank {
            if !(self.damping > 0.0 && self.damping < 1.0) {
                return Err(EngineError::InvalidParameter(format!("damping {} outside (0,1)", self.damping)));
            }
            if !(self.epsilon > 0.0) {
                return Err(EngineError::InvalidParameter(format!("epsilon {} must be > 0", self.epsilon)));
            }
            if self.max_iterations == 0 {
                return Err(EngineError::InvalidParameter("max_iterations must be >= 1".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    Process = 0,
    Reduce = 1,
    Apply = 2,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::Process, Phase::Reduce, Phase::Apply];

    pub fn name(self) -> &'static str {
        match self {
            Self::Process => "process",
            Self::Reduce => "reduce",
            Self::Apply => "apply",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Phase {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "process" => Ok(Self::Process),
            "reduce" => Ok(Self::Reduce),
            "apply" => Ok(Self::Apply),
            other => Err(format!("unknown phase {other:?}")),
        }
    }
}

/// Coalesced shard-to-shard traffic within one phase of one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Message {
    pub iteration: u32,
    pub phase: Phase,
    pub src_shard: ShardId,
    pub dst_shard: ShardId,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TrafficTrace {
    pub messages: Vec<Message>,
}

impl TrafficTrace {
    pub fn phase_bytes(&self) -> [u64; 3] {
        let mut totals = [0u64; 3];
        for m in &self.messages {
            totals[m.phase as usize] += m.bytes;
        }
        totals
    }

    pub fn total_bytes(&self) -> u64 {
        self.phase_bytes().iter().sum()
    }

    pub fn iterations(&self) -> u32 {
        self.messages.iter().map(|m| m.iteration).max().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "iteration,phase,src_shard,dst_shard,bytes")?;
        for m in &self.messages {
            writeln!(out, "{},{},{},{},{}", m.iteration, m.phase, m.src_shard, m.dst_shard, m.bytes)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self, String> {
        let mut messages = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            let line = line.map_err(|e| e.to_string())?;
            if idx == 0 || line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.trim().split(',').collect();
            if cols.len() != 5 {
                return Err(format!("trace line {}: expected 5 columns", idx + 1));
            }
            let bad = |c: &str| format!("trace line {}: bad field {c:?}", idx + 1);
            messages.push(Message {
                iteration: cols[0].parse().map_err(|_| bad(cols[0]))?,
                phase: cols[1].parse()?,
                src_shard: cols[2].parse().map_err(|_| bad(cols[2]))?,
                dst_shard: cols[3].parse().map_err(|_| bad(cols[3]))?,
                bytes: cols[4].parse().map_err(|_| bad(cols[4]))?,
            });
        }
        messages.sort();
        Ok(Self { messages })
    }
}

/// Per-run iteration statistics.
///
/// `phase_words` is the partition-independent logical word count per phase:
/// process counts one word per active vertex with out-edges plus one per
/// out-edge, reduce two per fresh in-edge, apply one per updated vertex.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IterationStats {
    pub iterations: usize,
    /// Active-list size at the start of each iteration.
    pub frontier_sizes: Vec<usize>,
    /// Active-list size after the last iteration.
    pub final_frontier: usize,
    pub phase_words: Vec<[u64; 3]>,
    pub converged: bool,
}

impl IterationStats {
    pub fn phase_bytes(&self) -> Vec<[u64; 3]> {
        self.phase_words.iter().map(|w| w.map(|x| x * WORD_BYTES)).collect()
    }
}

/// Word counts before co-located traffic is dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TraceCounters {
    /// Distinct (active vertex, Edge Table shard) pairs, summed over iterations.
    pub active_shard_pairs: u64,
    pub processed_out_edges: u64,
    pub processed_in_edges: u64,
    pub applied_updates: u64,
    pub process_words: u64,
    pub reduce_words: u64,
    pub apply_words: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EngineOptions {
    /// Reduce over every in-edge of every vertex each iteration for traffic
    /// accounting (values still fold only fresh edge properties).
    pub reduce_all_vertices: bool,
    /// Shuffle each vertex's in-edge order before reducing.
    pub reduce_order_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub properties: Vec<f64>,
    pub stats: IterationStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TracedRun {
    pub properties: Vec<f64>,
    pub trace: TrafficTrace,
    pub stats: IterationStats,
    pub counters: TraceCounters,
}

pub fn run_algorithm(g: &Graph, spec: &AlgorithmSpec, source: Option<VertexId>) -> Result<RunOutput, EngineError> {
    run_algorithm_with(g, spec, source, EngineOptions::default())
}

pub fn run_algorithm_with(g: &Graph, spec: &AlgorithmSpec, source: Option<VertexId>, opts: EngineOptions) -> Result<RunOutput, EngineError> {
    let (properties, stats) = execute(g, spec, source, opts, None)?;
    Ok(RunOutput { properties, stats })
}

pub fn emit_traces(g: &Graph, spec: &AlgorithmSpec, source: Option<VertexId>, pmap: &PartitionMap) -> Result<TracedRun, EngineError> {
    emit_traces_with(g, spec, source, pmap, EngineOptions::default())
}

pub fn emit_traces_with(
    g: &Graph,
    spec: &AlgorithmSpec,
    source: Option<VertexId>,
    pmap: &PartitionMap,
    opts: EngineOptions,
) -> Result<TracedRun, EngineError> {
    pmap.check_covers(g)?;
    let mut sink = TraceSink::new(pmap);
    let (properties, stats) = execute(g, spec, source, opts, Some(&mut sink))?;
    Ok(TracedRun { properties, trace: TrafficTrace { messages: sink.messages }, stats, counters: sink.counters })
}

/// Phase bytes divided by `(num_edges + num_vertices) * WORD_BYTES`.
pub fn normalized_data_movement(trace: &TrafficTrace, g: &Graph) -> [f64; 3] {
    let size = ((g.num_edges() + g.num_vertices()) as u64 * WORD_BYTES) as f64;
    if size == 0.0 {
        return [0.0; 3];
    }
    trace.phase_bytes().map(|b| b as f64 / size)
}

struct TraceSink<'a> {
    pmap: &'a PartitionMap,
    pending: HashMap<(ShardId, ShardId), u64>,
    messages: Vec<Message>,
    counters: TraceCounters,
}

impl<'a> TraceSink<'a> {
    fn new(pmap: &'a PartitionMap) -> Self {
        Self { pmap, pending: HashMap::new(), messages: Vec::new(), counters: TraceCounters::default() }
    }

    fn word(&mut self, phase: Phase, src: ShardId, dst: ShardId) {
        match phase {
            Phase::Process => self.counters.process_words += 1,
            Phase::Reduce => self.counters.reduce_words += 1,
            Phase::Apply => self.counters.apply_words += 1,
        }
        if !self.pmap.colocated(src, dst) {
            *self.pending.entry((src, dst)).or_insert(0) += 1;
        }
    }

    fn flush(&mut self, iteration: u32, phase: Phase) {
        let mut flows: Vec<_> = self.pending.drain().collect();
        flows.sort_unstable();
        self.messages.extend(flows.into_iter().map(|((src, dst), words)| Message {
            iteration,
            phase,
            src_shard: src,
            dst_shard: dst,
            bytes: words * WORD_BYTES,
        }));
    }
}

fn execute(
    g: &Graph,
    spec: &AlgorithmSpec,
    source: Option<VertexId>,
    opts: EngineOptions,
    mut sink: Option<&mut TraceSink<'_>>,
) -> Result<(Vec<f64>, IterationStats), EngineError> {
    spec.validate()?;
    let n = g.num_vertices();
    let algo = spec.algorithm;
    let source = if algo.needs_source() {
        let s = source.ok_or(EngineError::MissingSource { algorithm: algo.name() })?;
        if s as usize >= n {
            return Err(EngineError::SourceOutOfRange { source_vertex: s, num_vertices: n });
        }
        Some(s)
    } else {
        None
    };
    if algo == Algorithm::Sssp {
        if let Some(edge) = (0..g.num_edges()).find(|&e| g.weight(e) < 0.0) {
            return Err(EngineError::NegativeWeight { edge });
        }
    }

    let identity = spec.reduce_identity();
    let mut prop: Vec<f64> = (0..n as VertexId).map(|v| spec.initial_property(v, source, n)).collect();
    let mut temp = vec![identity; n];
    let mut eprop = vec![0.0f64; g.num_edges()];
    let mut edge_stamp = vec![0u32; g.num_edges()];
    let mut vertex_stamp = vec![0u32; n];
    let mut active: Vec<VertexId> = match source {
        Some(s) => vec![s],
        None => (0..n as VertexId).collect(),
    };
    let max_iterations = match algo {
        Algorithm::PageRank => spec.max_iterations,
        // Monotone min-propagation settles within n rounds.
        _ => n + 1,
    };

    let mut rng = opts.reduce_order_seed.map(ChaCha8Rng::seed_from_u64);
    let mut in_scratch: Vec<EdgeId> = Vec::new();
    let mut stats = IterationStats::default();

    while !active.is_empty() && stats.iterations < max_iterations {
        let it = stats.iterations as u32 + 1;
        stats.frontier_sizes.push(active.len());
        let mut words = [0u64; 3];

        // PageRank: rank mass of dangling vertices is spread uniformly.
        let dangling_mass: f64 = if algo == Algorithm::PageRank {
            (0..n as VertexId).filter(|&v| g.out_degree(v) == 0).map(|v| prop[v as usize]).sum()
        } else {
            0.0
        };

        // Process
        let mut touched: Vec<VertexId> = Vec::new();
        for &u in &active {
            let range = g.out_edge_range(u);
            if range.is_empty() {
                continue;
            }
            let out_deg = range.len();
            words[Phase::Process as usize] += 1 + out_deg as u64;
            let u_prop = prop[u as usize];
            let mut last_et: Option<ShardId> = None;
            for e in range {
                eprop[e] = spec.process(u_prop, g.weight(e), out_deg);
                edge_stamp[e] = it;
                let v = g.target(e);
                if vertex_stamp[v as usize] != it {
                    vertex_stamp[v as usize] = it;
                    touched.push(v);
                }
                if let Some(sink) = sink.as_deref_mut() {
                    let pm = sink.pmap;
                    let et = pm.edge_table_shard(e);
                    let vp = pm.vertex_prop_shard(u);
                    if last_et != Some(et) {
                        last_et = Some(et);
                        sink.counters.active_shard_pairs += 1;
                        sink.word(Phase::Process, et, vp);
                    }
                    sink.counters.processed_out_edges += 1;
                    sink.word(Phase::Process, vp, pm.edge_prop_shard(e));
                }
            }
        }
        if let Some(sink) = sink.as_deref_mut() {
            sink.flush(it, Phase::Process);
        }

        // Reduce
        touched.sort_unstable();
        if opts.reduce_all_vertices {
            for v in 0..n as VertexId {
                let count = g.in_degree(v) as u64;
                words[Phase::Reduce as usize] += 2 * count;
                if let Some(sink) = sink.as_deref_mut() {
                    for &e in g.in_edge_ids(v) {
                        reduce_traffic(sink, e, v);
                    }
                }
            }
        }
        for &v in &touched {
            in_scratch.clear();
            in_scratch.extend_from_slice(g.in_edge_ids(v));
            if let Some(rng) = rng.as_mut() {
                in_scratch.shuffle(rng);
            }
            let mut acc = identity;
            for &e in &in_scratch {
                if edge_stamp[e] != it {
                    continue;
                }
                acc = spec.reduce(acc, eprop[e]);
                if !opts.reduce_all_vertices {
                    words[Phase::Reduce as usize] += 2;
                    if let Some(sink) = sink.as_deref_mut() {
                        reduce_traffic(sink, e, v);
                    }
                }
            }
            temp[v as usize] = acc;
        }
        if let Some(sink) = sink.as_deref_mut() {
            sink.flush(it, Phase::Reduce);
        }

        // Apply
        let mut next_active = Vec::new();
        match algo {
            Algorithm::Bfs | Algorithm::Sssp => {
                for &v in &touched {
                    let old = prop[v as usize];
                    let new = spec.apply(temp[v as usize], old);
                    if new < old {
                        prop[v as usize] = new;
                        next_active.push(v);
                        words[Phase::Apply as usize] += 1;
                        apply_traffic(sink.as_deref_mut(), v);
                    }
                    temp[v as usize] = identity;
                }
            }
            Algorithm::PageRank => {
                let mut delta = 0.0;
                for v in 0..n as VertexId {
                    let fresh = vertex_stamp[v as usize] == it;
                    let acc = if fresh { temp[v as usize] } else { identity };
                    let new = spec.apply_rank(acc, dangling_mass, n);
                    let old = prop[v as usize];
                    delta += (new - old).abs();
                    if fresh && new != old {
                        words[Phase::Apply as usize] += 1;
                        apply_traffic(sink.as_deref_mut(), v);
                    }
                    prop[v as usize] = new;
                    temp[v as usize] = identity;
                }
                if delta >= spec.epsilon {
                    next_active = (0..n as VertexId).collect();
                } else {
                    stats.converged = true;
                }
            }
        }
        if let Some(sink) = sink.as_deref_mut() {
            sink.flush(it, Phase::Apply);
        }

        stats.phase_words.push(words);
        stats.iterations += 1;
        active = next_active;
    }

    stats.final_frontier = active.len();
    if algo != Algorithm::PageRank {
        stats.converged = active.is_empty();
    } else if n == 0 {
        stats.converged = true;
    }
    Ok((prop, stats))
}

fn reduce_traffic(sink: &mut TraceSink<'_>, e: EdgeId, v: VertexId) {
    let pm = sink.pmap;
    let vt = pm.vertex_temp_shard(v);
    sink.counters.processed_in_edges += 1;
    sink.word(Phase::Reduce, pm.edge_table_shard(e), vt);
    sink.word(Phase::Reduce, pm.edge_prop_shard(e), vt);
}

fn apply_traffic(sink: Option<&mut TraceSink<'_>>, v: VertexId) {
    if let Some(sink) = sink {
        let pm = sink.pmap;
        sink.counters.applied_updates += 1;
        sink.word(Phase::Apply, pm.vertex_temp_shard(v), pm.vertex_prop_shard(v));
    }
}
