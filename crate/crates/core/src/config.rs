//! Experiment configuration.
//!
//! Grammar, one item per line:
//!
//! ```text
//! # comment
//! [section]
//! key = value
//! ```
//!
//! Sections are `graph`, `algorithms`, `partition`, `placement`, `noc` and
//! `output`. Lists are comma separated; seed lists also accept `a..b`
//! (half-open). Syntax errors stop parsing; semantic problems are collected
//! and reported together.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::engine::Algorithm;
use crate::noc::NocParams;
use crate::partition::ModuloMode;
use crate::placement::{ConstraintMode, CostMode, Topology, WeightMode};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("cannot read {path}: {reason}")]
    Unreadable { path: String, reason: String },
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("{} violation(s):\n  {}", .0.len(), .0.join("\n  "))]
    Invalid(Vec<String>),
}

/// Raw `section -> key -> (value, line)` view of a config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    pub sections: BTreeMap<String, BTreeMap<String, (String, usize)>>,
}

pub fn parse_raw(text: &str) -> Result<RawConfig, ConfigError> {
    let mut raw = RawConfig::default();
    let mut section = String::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax { line: line_no, reason: "unterminated section header".into() })?;
            section = name.trim().to_ascii_lowercase();
            if section.is_empty() {
                return Err(ConfigError::Syntax { line: line_no, reason: "empty section name".into() });
            }
            raw.sections.entry(section.clone()).or_default();
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax { line: line_no, reason: "expected `key = value`".into() })?;
        let key = key.trim().to_ascii_lowercase();
        if key.is_empty() {
            return Err(ConfigError::Syntax { line: line_no, reason: "empty key".into() });
        }
        let entries = raw.sections.entry(section.clone()).or_default();
        if entries.insert(key.clone(), (value.trim().to_string(), line_no)).is_some() {
            return Err(ConfigError::Syntax { line: line_no, reason: format!("duplicate key {key:?}") });
        }
    }
    Ok(raw)
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    File { path: PathBuf, weighted: bool },
    PowerLaw { num_vertices: usize, avg_degree: f64, skew: f64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceVertex {
    /// Highest out-degree vertex, lowest id on ties.
    Auto,
    Id(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    Exact,
    Heuristic,
    Random,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Heuristic => "heuristic",
            Self::Random => "random",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Self::Exact),
            "heuristic" => Ok(Self::Heuristic),
            "random" => Ok(Self::Random),
            other => Err(format!("unknown strategy {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Colocation {
    /// Every shard is its own node.
    None,
    /// All shards of a class share one node.
    Class,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub graph: GraphSource,
    /// Maximum integer weight drawn for SSSP on unweighted inputs; 0 keeps unit weights.
    pub sssp_max_weight: u32,
    pub weight_seed: u64,

    pub algorithms: Vec<Algorithm>,
    pub source: SourceVertex,
    pub damping: f64,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub reduce_all_vertices: bool,

    pub clusters: usize,
    pub capacity_edges: usize,
    pub capacity_vertices: usize,
    pub modulo: ModuloMode,
    pub colocation: Colocation,

    pub grid_width: u32,
    pub grid_height: u32,
    pub topologies: Vec<Topology>,
    pub cost_mode: CostMode,
    pub constraints: ConstraintMode,
    pub weights: WeightMode,
    /// Optimizing strategies; the random baseline always runs in addition.
    pub strategies: Vec<Strategy>,
    pub budget: usize,
    pub restarts: usize,
    pub seed: u64,
    pub random_seeds: Vec<u64>,
    pub exact_threshold: usize,
    pub branch_and_bound: bool,

    pub noc: NocParams,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            graph: GraphSource::PowerLaw { num_vertices: 1 << 14, avg_degree: 8.0, skew: 1.0, seed: 42 },
            sssp_max_weight: 0,
            weight_seed: 7,
            algorithms: vec![Algorithm::Bfs, Algorithm::Sssp, Algorithm::PageRank],
            source: SourceVertex::Auto,
            damping: 0.85,
            epsilon: 1e-6,
            max_iterations: 20,
            reduce_all_vertices: false,
            clusters: 16,
            capacity_edges: 1 << 20,
            capacity_vertices: 1 << 20,
            modulo: ModuloMode::SortedPosition,
            colocation: Colocation::None,
            grid_width: 8,
            grid_height: 8,
            topologies: vec![Topology::Mesh2D],
            cost_mode: CostMode::Paper,
            constraints: ConstraintMode::StrictBand,
            weights: WeightMode::TrafficWeighted,
            strategies: vec![Strategy::Heuristic],
            budget: 200_000,
            restarts: 4,
            seed: 1,
            random_seeds: (0..50).collect(),
            exact_threshold: 9,
            branch_and_bound: false,
            noc: NocParams::default(),
            output_dir: PathBuf::from("out"),
        }
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(", ")
}

/// Contiguous seed runs print as `a..b`.
fn format_seeds(seeds: &[u64]) -> String {
    if seeds.len() > 1 && seeds.windows(2).all(|w| w[1] == w[0] + 1) {
        return format!("{}..{}", seeds[0], seeds[seeds.len() - 1] + 1);
    }
    join(seeds)
}

fn parse_seeds(value: &str) -> Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| format!("bad seed range {item:?}"))?;
            let b: u64 = b.trim().parse().map_err(|_| format!("bad seed range {item:?}"))?;
            out.extend(a..b);
        } else {
            out.push(item.parse().map_err(|_| format!("bad seed {item:?}"))?);
        }
    }
    Ok(out)
}

fn parse_grid(value: &str) -> Result<(u32, u32), String> {
    let (w, h) = value.split_once(['x', 'X']).ok_or_else(|| format!("grid {value:?} is not WxH"))?;
    let w = w.trim().parse().map_err(|_| format!("bad grid width in {value:?}"))?;
    let h = h.trim().parse().map_err(|_| format!("bad grid height in {value:?}"))?;
    Ok((w, h))
}

fn modulo_name(m: ModuloMode) -> &'static str {
    match m {
        ModuloMode::SortedPosition => "sorted",
        ModuloMode::RawId => "raw",
    }
}

impl ExperimentConfig {
    /// Deterministic text form; parsing it yields an equal config.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let w = &mut s;
        let _ = writeln!(w, "[graph]");
        match &self.graph {
            GraphSource::File { path, weighted } => {
                let _ = writeln!(w, "path = {}", path.display());
                let _ = writeln!(w, "weighted = {weighted}");
            }
            GraphSource::PowerLaw { num_vertices, avg_degree, skew, seed } => {
                let _ = writeln!(w, "generator = power_law");
                let _ = writeln!(w, "num_vertices = {num_vertices}");
                let _ = writeln!(w, "avg_degree = {avg_degree}");
                let _ = writeln!(w, "skew = {skew}");
                let _ = writeln!(w, "seed = {seed}");
            }
        }
        let _ = writeln!(w, "sssp_max_weight = {}", self.sssp_max_weight);
        let _ = writeln!(w, "weight_seed = {}", self.weight_seed);
        let _ = writeln!(w, "\n[algorithms]");
        let _ = writeln!(w, "list = {}", join(&self.algorithms));
        let _ = writeln!(w, "source = {}", match self.source { SourceVertex::Auto => "auto".to_string(), SourceVertex::Id(v) => v.to_string() });
        let _ = writeln!(w, "damping = {}", self.damping);
        let _ = writeln!(w, "epsilon = {:e}", self.epsilon);
        let _ = writeln!(w, "max_iterations = {}", self.max_iterations);
        let _ = writeln!(w, "reduce_all_vertices = {}", self.reduce_all_vertices);
        let _ = writeln!(w, "\n[partition]");
        let _ = writeln!(w, "clusters = {}", self.clusters);
        let _ = writeln!(w, "capacity_edges = {}", self.capacity_edges);
        let _ = writeln!(w, "capacity_vertices = {}", self.capacity_vertices);
        let _ = writeln!(w, "modulo = {}", modulo_name(self.modulo));
        let _ = writeln!(w, "colocate = {}", match self.colocation { Colocation::None => "none", Colocation::Class => "class" });
        let _ = writeln!(w, "\n[placement]");
        let _ = writeln!(w, "grid = {}x{}", self.grid_width, self.grid_height);
        let _ = writeln!(w, "topologies = {}", join(&self.topologies));
        let _ = writeln!(w, "cost_mode = {}", self.cost_mode.name());
        let _ = writeln!(w, "constraints = {}", self.constraints.name());
        let _ = writeln!(w, "weights = {}", self.weights.name());
        let _ = writeln!(w, "strategies = {}", join(&self.strategies));
        let _ = writeln!(w, "budget = {}", self.budget);
        let _ = writeln!(w, "restarts = {}", self.restarts);
        let _ = writeln!(w, "seed = {}", self.seed);
        let _ = writeln!(w, "random_seeds = {}", format_seeds(&self.random_seeds));
        let _ = writeln!(w, "exact_threshold = {}", self.exact_threshold);
        let _ = writeln!(w, "branch_and_bound = {}", self.branch_and_bound);
        let _ = writeln!(w, "\n[noc]");
        let _ = writeln!(w, "frequency_hz = {:e}", self.noc.frequency_hz);
        let _ = writeln!(w, "packet_bytes = {}", self.noc.packet_bytes);
        let _ = writeln!(w, "hop_latency_ns = {}", self.noc.hop_latency_ns);
        let _ = writeln!(w, "ports = {}", self.noc.ports);
        let _ = writeln!(w, "hop_energy_pj = {}", self.noc.hop_energy_pj);
        let _ = writeln!(w, "injection_energy_pj = {}", self.noc.injection_energy_pj);
        let _ = writeln!(w, "\n[output]");
        let _ = writeln!(w, "dir = {}", self.output_dir.display());
        s
    }

    /// Upper estimate of the shard count: four per class plus capacity overflow.
    pub fn estimated_shards(&self) -> usize {
        let k = self.clusters.max(1);
        let (edges, vertices) = match &self.graph {
            GraphSource::PowerLaw { num_vertices, avg_degree, .. } => ((*num_vertices as f64 * avg_degree).round() as usize, *num_vertices),
            GraphSource::File { .. } => (0, 0),
        };
        let per_kind = |items: usize, cap: usize| {
            let per_class = items.div_ceil(k);
            if cap == 0 { 1 } else { per_class.div_ceil(cap).max(1) }
        };
        2 * k * per_kind(edges, self.capacity_edges) + 2 * k * per_kind(vertices, self.capacity_vertices)
    }

    /// Semantic checks, all reported together.
    pub fn violations(&self, base_dir: &Path) -> Vec<String> {
        let mut v = Vec::new();
        match &self.graph {
            GraphSource::File { path, .. } => {
                let full = base_dir.join(path);
                if !full.is_file() {
                    v.push(format!("graph file {} not found", full.display()));
                }
            }
            GraphSource::PowerLaw { num_vertices, avg_degree, skew, .. } => {
                if *num_vertices == 0 {
                    v.push("num_vertices must be >= 1".into());
                }
                if !(*avg_degree >= 0.0 && avg_degree.is_finite()) {
                    v.push("avg_degree must be >= 0".into());
                }
                if !(*skew > 0.0 && skew.is_finite()) {
                    v.push("skew must be > 0".into());
                }
            }
        }
        if self.algorithms.is_empty() {
            v.push("algorithm list is empty".into());
        }
        if self.algorithms.contains(&Algorithm::PageRank) {
            if !(self.damping > 0.0 && self.damping < 1.0) {
                v.push("damping outside (0,1)".into());
            }
            if !(self.epsilon > 0.0) {
                v.push("epsilon must be > 0".into());
            }
            if self.max_iterations == 0 {
                v.push("max_iterations must be >= 1".into());
            }
        }
        if let (SourceVertex::Id(id), GraphSource::PowerLaw { num_vertices, .. }) = (self.source, &self.graph) {
            if id as usize >= *num_vertices {
                v.push(format!("source {id} out of range for {num_vertices} vertices"));
            }
        }
        if self.clusters == 0 {
            v.push("clusters must be >= 1".into());
        }
        if self.capacity_edges == 0 || self.capacity_vertices == 0 {
            v.push("capacities must be >= 1".into());
        }
        let cells = self.grid_width as usize * self.grid_height as usize;
        let needed = self.estimated_shards();
        if cells < needed {
            v.push(format!("grid too small: {}x{} has {cells} cells, needs at least {needed}", self.grid_width, self.grid_height));
        }
        if self.topologies.is_empty() {
            v.push("topology list is empty".into());
        }
        if self.strategies.contains(&Strategy::Exact) && cells > self.exact_threshold && !self.branch_and_bound {
            v.push(format!("exact strategy on {cells} cells exceeds exact_threshold {}; enable branch_and_bound", self.exact_threshold));
        }
        if self.random_seeds.is_empty() {
            v.push("random_seeds must be nonempty".into());
        }
        if self.restarts == 0 {
            v.push("restarts must be >= 1".into());
        }
        if let Err(e) = self.noc.validate() {
            v.push(e.to_string());
        }
        v
    }
}

/// Parses `text` and collects every semantic violation. Relative graph paths
/// are resolved against `base_dir`.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<ExperimentConfig, ConfigError> {
    let raw = parse_raw(text)?;
    let mut cfg = ExperimentConfig::default();
    let mut errs: Vec<String> = Vec::new();

    let known: &[(&str, &[&str])] = &[
        ("graph", &["generator", "path", "weighted", "num_vertices", "avg_degree", "skew", "seed", "sssp_max_weight", "weight_seed"]),
        ("algorithms", &["list", "source", "damping", "epsilon", "max_iterations", "reduce_all_vertices"]),
        ("partition", &["clusters", "capacity_edges", "capacity_vertices", "modulo", "colocate"]),
        (
            "placement",
            &["grid", "topologies", "cost_mode", "constraints", "weights", "strategies", "budget", "restarts", "seed", "random_seeds", "exact_threshold", "branch_and_bound"],
        ),
        ("noc", &["frequency_hz", "packet_bytes", "hop_latency_ns", "ports", "hop_energy_pj", "injection_energy_pj"]),
        ("output", &["dir"]),
    ];
    for (section, keys) in &raw.sections {
        match known.iter().find(|(s, _)| s == section) {
            None => errs.push(format!("unknown section [{section}]")),
            Some((_, allowed)) => {
                for (key, (_, line)) in keys {
                    if !allowed.contains(&key.as_str()) {
                        errs.push(format!("line {line}: unknown key {key:?} in [{section}]"));
                    }
                }
            }
        }
    }

    let get = |section: &str, key: &str| raw.sections.get(section).and_then(|s| s.get(key));
    macro_rules! field {
        ($section:expr, $key:expr, $target:expr, $parse:expr) => {
            if let Some((value, line)) = get($section, $key) {
                match $parse(value.as_str()) {
                    Ok(parsed) => $target = parsed,
                    Err(e) => errs.push(format!("line {}: {}: {}", line, $key, e)),
                }
            }
        };
    }
    fn num<T: FromStr>(s: &str) -> Result<T, String> {
        s.parse::<T>().map_err(|_| format!("cannot parse {s:?}"))
    }
    fn list<T: FromStr<Err = String>>(s: &str) -> Result<Vec<T>, String> {
        s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(T::from_str).collect()
    }

    let path = get("graph", "path").map(|(p, _)| p.clone());
    let generator = get("graph", "generator").map(|(g, l)| (g.clone(), *l));
    match (path, generator) {
        (Some(_), Some((_, line))) => errs.push(format!("line {line}: graph has both path and generator")),
        (Some(p), None) => {
            let mut weighted = false;
            field!("graph", "weighted", weighted, num::<bool>);
            cfg.graph = GraphSource::File { path: PathBuf::from(p), weighted };
        }
        (None, generator) => {
            if let Some((g, line)) = generator {
                if g != "power_law" {
                    errs.push(format!("line {line}: unknown generator {g:?}"));
                }
            }
            if let GraphSource::PowerLaw { num_vertices, avg_degree, skew, seed } = &mut cfg.graph {
                field!("graph", "num_vertices", *num_vertices, num::<usize>);
                field!("graph", "avg_degree", *avg_degree, num::<f64>);
                field!("graph", "skew", *skew, num::<f64>);
                field!("graph", "seed", *seed, num::<u64>);
            }
        }
    }
    field!("graph", "sssp_max_weight", cfg.sssp_max_weight, num::<u32>);
    field!("graph", "weight_seed", cfg.weight_seed, num::<u64>);

    field!("algorithms", "list", cfg.algorithms, list::<Algorithm>);
    field!("algorithms", "source", cfg.source, |s: &str| if s == "auto" { Ok(SourceVertex::Auto) } else { num::<u32>(s).map(SourceVertex::Id) });
    field!("algorithms", "damping", cfg.damping, num::<f64>);
    field!("algorithms", "epsilon", cfg.epsilon, num::<f64>);
    field!("algorithms", "max_iterations", cfg.max_iterations, num::<usize>);
    field!("algorithms", "reduce_all_vertices", cfg.reduce_all_vertices, num::<bool>);

    field!("partition", "clusters", cfg.clusters, num::<usize>);
    field!("partition", "capacity_edges", cfg.capacity_edges, num::<usize>);
    field!("partition", "capacity_vertices", cfg.capacity_vertices, num::<usize>);
    field!("partition", "modulo", cfg.modulo, |s: &str| match s {
        "sorted" => Ok(ModuloMode::SortedPosition),
        "raw" => Ok(ModuloMode::RawId),
        other => Err(format!("unknown modulo mode {other:?}")),
    });
    field!("partition", "colocate", cfg.colocation, |s: &str| match s {
        "none" => Ok(Colocation::None),
        "class" => Ok(Colocation::Class),
        other => Err(format!("unknown colocation {other:?}")),
    });

    if let Some((value, line)) = get("placement", "grid") {
        match parse_grid(value) {
            Ok((w, h)) => {
                cfg.grid_width = w;
                cfg.grid_height = h;
            }
            Err(e) => errs.push(format!("line {line}: {e}")),
        }
    }
    field!("placement", "topologies", cfg.topologies, list::<Topology>);
    field!("placement", "cost_mode", cfg.cost_mode, CostMode::from_str);
    field!("placement", "constraints", cfg.constraints, ConstraintMode::from_str);
    field!("placement", "weights", cfg.weights, WeightMode::from_str);
    field!("placement", "strategies", cfg.strategies, list::<Strategy>);
    field!("placement", "budget", cfg.budget, num::<usize>);
    field!("placement", "restarts", cfg.restarts, num::<usize>);
    field!("placement", "seed", cfg.seed, num::<u64>);
    field!("placement", "random_seeds", cfg.random_seeds, parse_seeds);
    field!("placement", "exact_threshold", cfg.exact_threshold, num::<usize>);
    field!("placement", "branch_and_bound", cfg.branch_and_bound, num::<bool>);
    cfg.strategies.retain(|s| *s != Strategy::Random);
    cfg.strategies.sort();
    cfg.strategies.dedup();

    field!("noc", "frequency_hz", cfg.noc.frequency_hz, num::<f64>);
    field!("noc", "packet_bytes", cfg.noc.packet_bytes, num::<u64>);
    field!("noc", "hop_latency_ns", cfg.noc.hop_latency_ns, num::<f64>);
    field!("noc", "ports", cfg.noc.ports, num::<u32>);
    field!("noc", "hop_energy_pj", cfg.noc.hop_energy_pj, num::<f64>);
    field!("noc", "injection_energy_pj", cfg.noc.injection_energy_pj, num::<f64>);

    field!("output", "dir", cfg.output_dir, |s: &str| Ok::<_, String>(PathBuf::from(s)));

    errs.extend(cfg.violations(base_dir));
    if errs.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError::Invalid(errs))
    }
}

/// Reads and validates a config file; relative paths resolve against its directory.
pub fn validate_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Unreadable { path: path.display().to_string(), reason: e.to_string() })?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut cfg = parse_config(&text, base)?;
    if let GraphSource::File { path: p, .. } = &mut cfg.graph {
        *p = base.join(&*p);
    }
    Ok(cfg)
}

/// NoC parameters from a sectionless (or `[noc]`) key-value file.
pub fn parse_noc_params(text: &str) -> Result<NocParams, ConfigError> {
    let raw = parse_raw(text)?;
    let mut params = NocParams::default();
    let mut errs = Vec::new();
    for (section, entries) in &raw.sections {
        if !(section.is_empty() || section == "noc") {
            errs.push(format!("unexpected section [{section}]"));
            continue;
        }
        for (key, (value, line)) in entries {
            let parsed: Result<(), String> = (|| {
                let f = || value.parse::<f64>().map_err(|_| format!("cannot parse {value:?}"));
                match key.as_str() {
                    "frequency_hz" => params.frequency_hz = f()?,
                    "packet_bytes" => params.packet_bytes = value.parse().map_err(|_| format!("cannot parse {value:?}"))?,
                    "hop_latency_ns" => params.hop_latency_ns = f()?,
                    "ports" => params.ports = value.parse().map_err(|_| format!("cannot parse {value:?}"))?,
                    "hop_energy_pj" => params.hop_energy_pj = f()?,
                    "injection_energy_pj" => params.injection_energy_pj = f()?,
                    other => return Err(format!("unknown key {other:?}")),
                }
                Ok(())
            })();
            if let Err(e) = parsed {
                errs.push(format!("line {line}: {e}"));
            }
        }
    }
    if let Err(e) = params.validate() {
        errs.push(e.to_string());
    }
    if errs.is_empty() {
        Ok(params)
    } else {
        Err(ConfigError::Invalid(errs))
    }
}
