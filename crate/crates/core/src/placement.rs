//! Placement of shards onto NoC grid cells.
//!
//! The affinity graph links each shard to the shards it exchanges data with;
//! placement minimizes `sum f_ij * cost(c_i, c_j)` over injective,
//! band-constrained assignments. This is a quadratic assignment problem: it is
//! solved exactly by branch and bound on small grids and by constrained
//! simulated annealing on large ones.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::engine::TrafficTrace;
use crate::error::PlacementError;
use crate::partition::{PartitionMap, ShardId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Topology {
    #[default]
    Mesh2D,
    FlattenedButterfly,
}

impl Topology {
    pub fn name(self) -> &'static str {
        match self {
            Self::Mesh2D => "mesh",
            Self::FlattenedButterfly => "fbfly",
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Topology {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mesh" | "mesh2d" => Ok(Self::Mesh2D),
            "fbfly" | "flattened-butterfly" => Ok(Self::FlattenedButterfly),
            other => Err(format!("unknown topology {other:?}")),
        }
    }
}

/// Hop-cost interpretation for the flattened butterfly. `Paper` uses the L1
/// distance for both topologies; `Corrected` charges one hop per differing
/// dimension on the flattened butterfly. The mesh is L1 either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CostMode {
    #[default]
    Paper,
    Corrected,
}

impl CostMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Paper => "paper",
            Self::Corrected => "corrected",
        }
    }
}

impl FromStr for CostMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(Self::Paper),
            "corrected" => Ok(Self::Corrected),
            other => Err(format!("unknown cost mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coord {
    pub x: u32,
    pub y: u32,
}

impl Coord {
    pub const fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// Grid of `width` columns and `height` rows; `y = 0` is the bottom row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridSpec {
    pub width: u32,
    pub height: u32,
    pub topology: Topology,
}

impl GridSpec {
    pub fn new(width: u32, height: u32, topology: Topology) -> Self {
        Self { width, height, topology }
    }

    pub fn cells(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn contains(&self, c: Coord) -> bool {
        c.x < self.width && c.y < self.height
    }

    /// All cells in ascending `(x, y)` order.
    pub fn all_cells(&self) -> Vec<Coord> {
        (0..self.width).flat_map(|x| (0..self.height).map(move |y| Coord::new(x, y))).collect()
    }
}

/// Hop count between two cells.
pub fn cost(topology: Topology, mode: CostMode, a: Coord, b: Coord) -> u32 {
    let dx = a.x.abs_diff(b.x);
    let dy = a.y.abs_diff(b.y);
    match (topology, mode) {
        (Topology::FlattenedButterfly, CostMode::Corrected) => u32::from(dx != 0) + u32::from(dy != 0),
        _ => dx + dy,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TopoNode {
    pub shard: ShardId,
    /// Data-structure index 1..=4.
    pub index: u8,
    pub rank: u32,
    /// Co-rank group (cyclic class).
    pub group: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightMode {
    /// Binary f-edges between co-rank shards of kinds {1,4} x {2,3}.
    #[default]
    PaperLiteral,
    /// f_ij = bytes exchanged between shards i and j in a trace.
    TrafficWeighted,
}

impl WeightMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::PaperLiteral => "paper",
            Self::TrafficWeighted => "traffic",
        }
    }
}

impl FromStr for WeightMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" | "paper_literal" | "binary" => Ok(Self::PaperLiteral),
            "traffic" | "traffic_weighted" => Ok(Self::TrafficWeighted),
            other => Err(format!("unknown weight mode {other:?}")),
        }
    }
}

/// Affinity graph over shards. Edges are undirected, stored once with `i < j`
/// (node positions, not shard ids) in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct TopologyGraph {
    pub nodes: Vec<TopoNode>,
    pub edges: Vec<(usize, usize, f64)>,
}

impl TopologyGraph {
    /// Builds from nodes and weighted pairs; weights of repeated pairs add up,
    /// self-pairs and zero weights are dropped.
    pub fn new(nodes: Vec<TopoNode>, pairs: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (a, b, w) in pairs {
            if a == b {
                continue;
            }
            *acc.entry((a.min(b), a.max(b))).or_insert(0.0) += w;
        }
        let edges = acc.into_iter().filter(|&(_, w)| w != 0.0).map(|((a, b), w)| (a, b, w)).collect();
        Self { nodes, edges }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn weight(&self, a: usize, b: usize) -> f64 {
        let key = (a.min(b), a.max(b));
        self.edges
            .binary_search_by(|&(x, y, _)| (x, y).cmp(&key))
            .map(|i| self.edges[i].2)
            .unwrap_or(0.0)
    }

    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for &(a, b, w) in &self.edges {
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        adj
    }

    /// Position of the node holding `shard`.
    pub fn position_of(&self, shard: ShardId) -> Option<usize> {
        self.nodes.iter().position(|n| n.shard == shard)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# nodes")?;
        writeln!(out, "shard_id,index,rank,group")?;
        for n in &self.nodes {
            writeln!(out, "{},{},{},{}", n.shard, n.index, n.rank, n.group)?;
        }
        writeln!(out, "# edges")?;
        writeln!(out, "shard_a,shard_b,weight")?;
        for &(a, b, w) in &self.edges {
            writeln!(out, "{},{},{}", self.nodes[a].shard, self.nodes[b].shard, w)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self, String> {
        let mut nodes = Vec::new();
        let mut raw_edges = Vec::new();
        let mut section = "";
        for (idx, line) in input.lines().enumerate() {
            let line = line.map_err(|e| e.to_string())?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('#') {
                section = if name.trim() == "nodes" { "nodes" } else { "edges" };
                continue;
            }
            if line.starts_with("shard") {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            let bad = || format!("topology line {}: malformed {line:?}", idx + 1);
            match (section, cols.len()) {
                ("nodes", 4) => nodes.push(TopoNode {
                    shard: cols[0].parse().map_err(|_| bad())?,
                    index: cols[1].parse().map_err(|_| bad())?,
                    rank: cols[2].parse().map_err(|_| bad())?,
                    group: cols[3].parse().map_err(|_| bad())?,
                }),
                ("edges", 3) => raw_edges.push((
                    cols[0].parse::<ShardId>().map_err(|_| bad())?,
                    cols[1].parse::<ShardId>().map_err(|_| bad())?,
                    cols[2].parse::<f64>().map_err(|_| bad())?,
                )),
                _ => return Err(bad()),
            }
        }
        let lookup: BTreeMap<ShardId, usize> = nodes.iter().enumerate().map(|(i, n)| (n.shard, i)).collect();
        let mut pairs = Vec::with_capacity(raw_edges.len());
        for (a, b, w) in raw_edges {
            let (Some(&i), Some(&j)) = (lookup.get(&a), lookup.get(&b)) else {
                return Err(format!("edge references unknown shard {a} or {b}"));
            };
            pairs.push((i, j, w));
        }
        Ok(Self::new(nodes, pairs))
    }
}

fn links_in_paper_mode(a: &TopoNode, b: &TopoNode) -> bool {
    let edge_side = |i: u8| i == 1 || i == 4;
    let vertex_side = |i: u8| i == 2 || i == 3;
    a.group == b.group && ((edge_side(a.index) && vertex_side(b.index)) || (vertex_side(a.index) && edge_side(b.index)))
}

/// One node per shard (node position = shard id).
pub fn build_topology_graph(pmap: &PartitionMap, mode: WeightMode, trace: Option<&TrafficTrace>) -> Result<TopologyGraph, PlacementError> {
    let nodes: Vec<TopoNode> = pmap
        .shards()
        .iter()
        .map(|s| TopoNode { shard: s.id, index: s.kind.index(), rank: s.rank, group: s.class })
        .collect();
    match mode {
        WeightMode::PaperLiteral => {
            let mut by_group: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
            for (i, n) in nodes.iter().enumerate() {
                by_group.entry(n.group).or_default().push(i);
            }
            let mut pairs = Vec::new();
            for members in by_group.values() {
                for (k, &i) in members.iter().enumerate() {
                    for &j in &members[k + 1..] {
                        if links_in_paper_mode(&nodes[i], &nodes[j]) {
                            pairs.push((i, j, 1.0));
                        }
                    }
                }
            }
            Ok(TopologyGraph::new(nodes, pairs))
        }
        WeightMode::TrafficWeighted => {
            let trace = trace.ok_or(PlacementError::TraceMismatch(u32::MAX))?;
            let n = nodes.len() as u32;
            let mut pairs = Vec::with_capacity(trace.messages.len());
            for m in &trace.messages {
                for s in [m.src_shard, m.dst_shard] {
                    if s >= n {
                        return Err(PlacementError::TraceMismatch(s));
                    }
                }
                pairs.push((m.src_shard as usize, m.dst_shard as usize, m.bytes as f64));
            }
            Ok(TopologyGraph::new(nodes, pairs))
        }
    }
}

/// Row-band constraints.
///
/// `Literal`: index 1 needs `y > 0`, index 4 needs `y < k-1`, indices 2 and 3
/// need `0 < y < k-1` and `x > 0`. `StrictBand` additionally pins index 1 to
/// the upper half (`y >= k/2`) and index 4 to the lower half
/// (`y < ceil(k/2)`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ConstraintMode {
    Literal,
    #[default]
    StrictBand,
}

impl ConstraintMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Literal => "literal",
            Self::StrictBand => "strict",
        }
    }

    pub fn allows(self, index: u8, c: Coord, grid: &GridSpec) -> bool {
        let k = grid.height;
        let interior_row = c.y > 0 && c.y + 1 < k;
        let literal = match index {
            1 => c.y > 0,
            4 => c.y + 1 < k,
            2 | 3 => interior_row && c.x > 0,
            _ => true,
        };
        let band = match (self, index) {
            (Self::StrictBand, 1) => c.y >= k / 2,
            (Self::StrictBand, 4) => c.y < k.div_ceil(2),
            _ => true,
        };
        literal && band
    }
}

impl FromStr for ConstraintMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "literal" => Ok(Self::Literal),
            "strict" | "strict_band" => Ok(Self::StrictBand),
            other => Err(format!("unknown constraint mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    OutOfBounds { shard: ShardId, at: Coord },
    Overlap { a: ShardId, b: ShardId, at: Coord },
    Band { shard: ShardId, index: u8, at: Coord },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::OutOfBounds { shard, at } => write!(f, "shard {shard} at {at} is outside the grid"),
            Self::Overlap { a, b, at } => write!(f, "shards {a} and {b} share cell {at}"),
            Self::Band { shard, index, at } => write!(f, "shard {shard} (index {index}) may not sit at {at}"),
        }
    }
}

/// Coordinates per topology node plus the objective they achieve.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub shards: Vec<ShardId>,
    pub coords: Vec<Coord>,
    pub objective: f64,
    lookup: Vec<u32>,
}

impl Placement {
    pub fn new(shards: Vec<ShardId>, coords: Vec<Coord>, objective: f64) -> Self {
        assert_eq!(shards.len(), coords.len());
        let max = shards.iter().copied().max().map_or(0, |m| m as usize + 1);
        let mut lookup = vec![u32::MAX; max];
        for (i, &s) in shards.iter().enumerate() {
            lookup[s as usize] = i as u32;
        }
        Self { shards, coords, objective, lookup }
    }

    pub fn coord_of(&self, shard: ShardId) -> Option<Coord> {
        match self.lookup.get(shard as usize) {
            Some(&i) if i != u32::MAX => Some(self.coords[i as usize]),
            _ => None,
        }
    }

    /// Writes `shard_id,index,rank,x,y`.
    pub fn write_csv<W: Write>(&self, tg: &TopologyGraph, mut out: W) -> io::Result<()> {
        writeln!(out, "shard_id,index,rank,x,y")?;
        for (n, c) in tg.nodes.iter().zip(&self.coords) {
            writeln!(out, "{},{},{},{},{}", n.shard, n.index, n.rank, c.x, c.y)?;
        }
        Ok(())
    }

    /// Reads a placement CSV. The objective is unknown and set to NaN.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self, String> {
        let mut shards = Vec::new();
        let mut coords = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            let line = line.map_err(|e| e.to_string())?;
            if idx == 0 || line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.trim().split(',').collect();
            let bad = || format!("placement line {}: malformed", idx + 1);
            if cols.len() != 5 {
                return Err(bad());
            }
            shards.push(cols[0].parse().map_err(|_| bad())?);
            coords.push(Coord::new(cols[3].parse().map_err(|_| bad())?, cols[4].parse().map_err(|_| bad())?));
        }
        Ok(Self::new(shards, coords, f64::NAN))
    }
}

/// Everything a solver needs.
#[derive(Debug, Clone, Copy)]
pub struct PlacementProblem<'a> {
    pub graph: &'a TopologyGraph,
    pub grid: GridSpec,
    pub cost_mode: CostMode,
    pub constraints: ConstraintMode,
}

impl<'a> PlacementProblem<'a> {
    pub fn new(graph: &'a TopologyGraph, grid: GridSpec) -> Self {
        Self { graph, grid, cost_mode: CostMode::default(), constraints: ConstraintMode::default() }
    }

    pub fn with_cost_mode(mut self, mode: CostMode) -> Self {
        self.cost_mode = mode;
        self
    }

    pub fn with_constraints(mut self, mode: ConstraintMode) -> Self {
        self.constraints = mode;
        self
    }

    fn hop(&self, a: Coord, b: Coord) -> u32 {
        cost(self.grid.topology, self.cost_mode, a, b)
    }

    /// `sum f_ij * cost` over the stored edges, in edge order.
    pub fn objective(&self, coords: &[Coord]) -> f64 {
        self.graph.edges.iter().map(|&(a, b, w)| w * self.hop(coords[a], coords[b]) as f64).sum()
    }

    fn allowed_cells(&self, node: usize) -> Vec<Coord> {
        let index = self.graph.nodes[node].index;
        self.grid.all_cells().into_iter().filter(|&c| self.constraints.allows(index, c, &self.grid)).collect()
    }

    fn ensure_fits(&self) -> Result<(), PlacementError> {
        if self.graph.len() > self.grid.cells() {
            return Err(PlacementError::GridTooSmall { width: self.grid.width, height: self.grid.height, nodes: self.graph.len() });
        }
        Ok(())
    }

    fn infeasible(&self) -> PlacementError {
        PlacementError::Infeasible { width: self.grid.width, height: self.grid.height }
    }

    fn finish(&self, coords: Vec<Coord>) -> Placement {
        let objective = self.objective(&coords);
        Placement::new(self.graph.nodes.iter().map(|n| n.shard).collect(), coords, objective)
    }
}

/// Bounds, injectivity and band violations of `coords` (one per node).
pub fn check_constraints(coords: &[Coord], nodes: &[TopoNode], grid: &GridSpec, mode: ConstraintMode) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen: BTreeMap<Coord, ShardId> = BTreeMap::new();
    for (n, &c) in nodes.iter().zip(coords) {
        if !grid.contains(c) {
            out.push(Violation::OutOfBounds { shard: n.shard, at: c });
            continue;
        }
        if let Some(&other) = seen.get(&c) {
            out.push(Violation::Overlap { a: other, b: n.shard, at: c });
        } else {
            seen.insert(c, n.shard);
        }
        if !mode.allows(n.index, c, grid) {
            out.push(Violation::Band { shard: n.shard, index: n.index, at: c });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactOptions {
    /// Largest grid (in cells) solved without explicitly enabling branch and bound.
    pub exhaustive_cells: usize,
    pub branch_and_bound: bool,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self { exhaustive_cells: 9, branch_and_bound: false }
    }
}

/// Provably optimal placement. Among optimal placements the one whose
/// coordinate vector (node order, cells ordered by `(x, y)`) is
/// lexicographically smallest is returned.
pub fn solve_placement_exact(problem: &PlacementProblem<'_>, opts: ExactOptions) -> Result<Placement, PlacementError> {
    problem.ensure_fits()?;
    if problem.grid.cells() > opts.exhaustive_cells && !opts.branch_and_bound {
        return Err(PlacementError::TooLargeForExact { cells: problem.grid.cells(), threshold: opts.exhaustive_cells });
    }
    let n = problem.graph.len();
    if n == 0 {
        return Ok(problem.finish(Vec::new()));
    }
    let domains: Vec<Vec<Coord>> = (0..n).map(|i| problem.allowed_cells(i)).collect();
    if domains.iter().any(Vec::is_empty) {
        return Err(problem.infeasible());
    }
    // Edges to earlier nodes, so the partial cost is known when a node is placed.
    let mut back: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut tail_weight = vec![0.0; n + 1];
    for &(a, b, w) in &problem.graph.edges {
        back[b].push((a, w));
        // Edge stays open until its later endpoint `b` is placed.
        tail_weight[b] += w;
    }
    // open_after[d] = total weight of edges whose later endpoint is >= d.
    let mut open_after = vec![0.0; n + 1];
    for d in (0..n).rev() {
        open_after[d] = open_after[d + 1] + tail_weight[d];
    }

    let mut search = BranchAndBound {
        problem,
        domains: &domains,
        back: &back,
        open_after: &open_after,
        used: BTreeMap::new(),
        current: Vec::with_capacity(n),
        best: None,
    };
    search.dfs(0, 0.0);
    let (coords, _) = search.best.ok_or_else(|| problem.infeasible())?;
    Ok(problem.finish(coords))
}

struct BranchAndBound<'p, 'g> {
    problem: &'p PlacementProblem<'g>,
    domains: &'p [Vec<Coord>],
    back: &'p [Vec<(usize, f64)>],
    open_after: &'p [f64],
    used: BTreeMap<Coord, ()>,
    current: Vec<Coord>,
    best: Option<(Vec<Coord>, f64)>,
}

impl BranchAndBound<'_, '_> {
    fn dfs(&mut self, depth: usize, partial: f64) {
        if depth == self.domains.len() {
            if self.best.as_ref().is_none_or(|(_, b)| partial < *b) {
                self.best = Some((self.current.clone(), partial));
            }
            return;
        }
        for &cell in &self.domains[depth] {
            if self.used.contains_key(&cell) {
                continue;
            }
            let added: f64 = self.back[depth]
                .iter()
                .map(|&(j, w)| w * self.problem.hop(cell, self.current[j]) as f64)
                .sum();
            let next = partial + added;
            // Every still-open edge joins two distinct cells, costing at least one hop.
            let bound = next + self.open_after[depth + 1];
            if let Some((_, best)) = &self.best {
                if bound >= *best {
                    continue;
                }
            }
            self.used.insert(cell, ());
            self.current.push(cell);
            self.dfs(depth + 1, next);
            self.current.pop();
            self.used.remove(&cell);
        }
    }
}

/// Banded initial layout: nodes in `(group, index)` order each take the free
/// allowed cell closest to the grid center, with augmenting paths resolving
/// conflicts so a feasible layout is always found when one exists.
pub fn initial_layout(problem: &PlacementProblem<'_>) -> Result<Vec<Coord>, PlacementError> {
    problem.ensure_fits()?;
    let grid = problem.grid;
    let n = problem.graph.len();
    let cells = grid.all_cells();
    let cell_id = |c: Coord| (c.x * grid.height + c.y) as usize;
    let center_key = |c: Coord| {
        let dx = (2 * c.x + 1).abs_diff(grid.width);
        let dy = (2 * c.y + 1).abs_diff(grid.height);
        (dx + dy, c.y, c.x)
    };
    let mut order: Vec<usize> = (0..n).collect();
    let nodes = &problem.graph.nodes;
    order.sort_by_key(|&i| (nodes[i].group, index_order(nodes[i].index), nodes[i].shard));

    let prefs: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let mut allowed = problem.allowed_cells(i);
            allowed.sort_by_key(|&c| center_key(c));
            allowed.into_iter().map(cell_id).collect()
        })
        .collect();

    let mut owner: Vec<Option<usize>> = vec![None; cells.len()];
    let mut assigned: Vec<Option<usize>> = vec![None; n];
    for &i in &order {
        let mut visited = vec![false; cells.len()];
        if !augment(i, &prefs, &mut owner, &mut assigned, &mut visited) {
            return Err(problem.infeasible());
        }
    }
    Ok(assigned.into_iter().map(|c| cells[c.expect("matched")]).collect())
}

/// Places the ET, vprop, vtemp, eprop of a group next to each other.
fn index_order(index: u8) -> u8 {
    match index {
        1 => 0,
        2 => 1,
        4 => 2,
        3 => 3,
        other => other,
    }
}

/// Kuhn-style augmenting path that tries free cells before displacing anyone.
fn augment(node: usize, prefs: &[Vec<usize>], owner: &mut [Option<usize>], assigned: &mut [Option<usize>], visited: &mut [bool]) -> bool {
    for &c in &prefs[node] {
        if owner[c].is_none() && !visited[c] {
            visited[c] = true;
            owner[c] = Some(node);
            assigned[node] = Some(c);
            return true;
        }
    }
    for &c in &prefs[node] {
        if visited[c] || Some(c) == assigned[node] {
            continue;
        }
        visited[c] = true;
        let other = owner[c].expect("free cells handled above");
        if augment(other, prefs, owner, assigned, visited) {
            owner[c] = Some(node);
            assigned[node] = Some(c);
            return true;
        }
    }
    false
}

/// Constraint-preserving simulated annealing from [`initial_layout`].
///
/// Each step proposes moving a random node to a random allowed cell, swapping
/// with the occupant when the occupant may take the vacated cell. The best
/// layout seen is returned, so the result never exceeds the initial objective.
pub fn solve_placement_heuristic(problem: &PlacementProblem<'_>, seed: u64, budget: usize) -> Result<Placement, PlacementError> {
    let mut coords = initial_layout(problem)?;
    let n = coords.len();
    if budget == 0 || n == 0 {
        return Ok(problem.finish(coords));
    }
    let grid = problem.grid;
    let cell_id = |c: Coord| (c.x * grid.height + c.y) as usize;
    let adj = problem.graph.adjacency();
    let domains: Vec<Vec<Coord>> = (0..n).map(|i| problem.allowed_cells(i)).collect();
    let mut occupant: Vec<Option<usize>> = vec![None; grid.cells()];
    for (i, &c) in coords.iter().enumerate() {
        occupant[cell_id(c)] = Some(i);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let node_delta = |coords: &[Coord], i: usize, to: Coord, skip: Option<usize>| -> f64 {
        let from = coords[i];
        adj[i]
            .iter()
            .filter(|&&(j, _)| Some(j) != skip)
            .map(|&(j, w)| w * (problem.hop(to, coords[j]) as f64 - problem.hop(from, coords[j]) as f64))
            .sum()
    };

    // Temperature scale from the mean uphill step of a few random proposals.
    let mut uphill = Vec::new();
    for _ in 0..64.min(budget) {
        let i = rng.gen_range(0..n);
        let to = domains[i][rng.gen_range(0..domains[i].len())];
        let d = node_delta(&coords, i, to, None);
        if d > 0.0 {
            uphill.push(d);
        }
    }
    let t_start = if uphill.is_empty() { 1.0 } else { uphill.iter().sum::<f64>() / uphill.len() as f64 };
    let t_end = t_start * 1e-3;
    let cooling = (t_end / t_start).powf(1.0 / budget as f64);

    let mut current = problem.objective(&coords);
    let mut best = current;
    let mut best_coords = coords.clone();
    let mut temperature = t_start;

    for _ in 0..budget {
        temperature *= cooling;
        let i = rng.gen_range(0..n);
        let from = coords[i];
        let to = domains[i][rng.gen_range(0..domains[i].len())];
        if to == from {
            continue;
        }
        let other = occupant[cell_id(to)];
        let delta = match other {
            None => node_delta(&coords, i, to, None),
            Some(j) => {
                if !problem.constraints.allows(problem.graph.nodes[j].index, from, &grid) {
                    continue;
                }
                // The i-j distance is unchanged by a swap.
                node_delta(&coords, i, to, Some(j)) + node_delta(&coords, j, from, Some(i))
            }
        };
        let accept = delta <= 0.0 || rng.gen::<f64>() < (-delta / temperature).exp();
        if !accept {
            continue;
        }
        coords[i] = to;
        occupant[cell_id(to)] = Some(i);
        match other {
            Some(j) => {
                coords[j] = from;
                occupant[cell_id(from)] = Some(j);
            }
            None => occupant[cell_id(from)] = None,
        }
        current += delta;
        if current < best - 1e-9 {
            // Re-anchor on the exact sum to keep drift out of comparisons.
            current = problem.objective(&coords);
            if current < best {
                best = current;
                best_coords.clone_from(&coords);
            }
        }
    }
    Ok(problem.finish(best_coords))
}

/// Independent annealing runs, one per seed, run in parallel; the best
/// objective wins, ties going to the earliest seed.
pub fn solve_placement_restarts(problem: &PlacementProblem<'_>, seeds: &[u64], budget: usize) -> Result<Placement, PlacementError> {
    let runs: Vec<Result<Placement, PlacementError>> = seeds.par_iter().map(|&s| solve_placement_heuristic(problem, s, budget)).collect();
    let mut best: Option<Placement> = None;
    for run in runs {
        let run = run?;
        if best.as_ref().is_none_or(|b| run.objective < b.objective) {
            best = Some(run);
        }
    }
    match best {
        Some(b) => Ok(b),
        None => solve_placement_heuristic(problem, 0, budget),
    }
}

/// Uniformly random injection of nodes into cells, ignoring band constraints.
pub fn random_placement(problem: &PlacementProblem<'_>, seed: u64) -> Result<Placement, PlacementError> {
    problem.ensure_fits()?;
    let mut cells = problem.grid.all_cells();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    cells.shuffle(&mut rng);
    cells.truncate(problem.graph.len());
    Ok(problem.finish(cells))
}
