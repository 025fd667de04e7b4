//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, VecDeque};
use std::fs;
use std::path::{Path, PathBuf};

use graphnoc::graph::Graph;
use graphnoc::partition::{PartitionMap, ShardKind};
use graphnoc::placement::{ConstraintMode, Coord, CostMode, GridSpec, TopoNode, Topology, TopologyGraph};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type EdgeList = Vec<(u32, u32, f64)>;

/// Random multigraph with integer weights in `[1, max_weight]`; self-loops allowed.
pub fn random_edges(rng: &mut ChaCha8Rng, n: usize, m: usize, max_weight: u32) -> EdgeList {
    (0..m)
        .map(|_| (rng.gen_range(0..n as u32), rng.gen_range(0..n as u32), rng.gen_range(1..=max_weight) as f64))
        .collect()
}

pub fn queue_bfs(n: usize, edges: &[(u32, u32, f64)], src: u32) -> Vec<f64> {
    let mut adj = vec![Vec::new(); n];
    for &(s, d, _) in edges {
        adj[s as usize].push(d as usize);
    }
    let mut dist = vec![f64::INFINITY; n];
    dist[src as usize] = 0.0;
    let mut q = VecDeque::from([src as usize]);
    while let Some(u) = q.pop_front() {
        for &v in &adj[u] {
            if dist[v].is_infinite() {
                dist[v] = dist[u] + 1.0;
                q.push_back(v);
            }
        }
    }
    dist
}

#[derive(PartialEq)]
struct Entry(f64, usize);
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

pub fn dijkstra(n: usize, edges: &[(u32, u32, f64)], src: u32) -> Vec<f64> {
    let mut adj = vec![Vec::new(); n];
    for &(s, d, w) in edges {
        adj[s as usize].push((d as usize, w));
    }
    let mut dist = vec![f64::INFINITY; n];
    dist[src as usize] = 0.0;
    let mut heap = BinaryHeap::from([Entry(0.0, src as usize)]);
    while let Some(Entry(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Entry(nd, v));
            }
        }
    }
    dist
}

/// Dense power iteration with uniform redistribution of dangling mass,
/// iterated until the L1 change drops below 1e-13.
pub fn dense_pagerank(n: usize, edges: &[(u32, u32, f64)], damping: f64) -> Vec<f64> {
    let mut out_deg = vec![0usize; n];
    for &(s, _, _) in edges {
        out_deg[s as usize] += 1;
    }
    // m[v][u] = multiplicity(u -> v) / outdeg(u)
    let mut m = vec![vec![0.0f64; n]; n];
    for &(s, d, _) in edges {
        m[d as usize][s as usize] += 1.0 / out_deg[s as usize] as f64;
    }
    let mut r = vec![1.0 / n as f64; n];
    for _ in 0..10_000 {
        let dangling: f64 = (0..n).filter(|&u| out_deg[u] == 0).map(|u| r[u]).sum();
        let next: Vec<f64> =
            (0..n).map(|v| (1.0 - damping) / n as f64 + damping * ((0..n).map(|u| m[v][u] * r[u]).sum::<f64>() + dangling / n as f64)).collect();
        let delta: f64 = next.iter().zip(&r).map(|(a, b)| (a - b).abs()).sum();
        r = next;
        if delta < 1e-13 {
            break;
        }
    }
    r
}

pub fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Band rules restated independently of the library.
pub fn cell_allowed(mode: ConstraintMode, index: u8, x: u32, y: u32, height: u32) -> bool {
    let k = height as i64;
    let y = y as i64;
    let ok = match index {
        1 => y >= 1,
        4 => y <= k - 2,
        2 | 3 => y >= 1 && y <= k - 2 && x >= 1,
        _ => true,
    };
    let band = match (mode, index) {
        // Upper half rounded down: on odd heights both bands share the middle row.
        (ConstraintMode::StrictBand, 1) => 2 * y >= k - (k % 2),
        (ConstraintMode::StrictBand, 4) => 2 * y < k + (k % 2),
        _ => true,
    };
    ok && band
}

pub fn hop_cost(topology: Topology, mode: CostMode, a: Coord, b: Coord) -> f64 {
    let dx = (a.x as i64 - b.x as i64).abs();
    let dy = (a.y as i64 - b.y as i64).abs();
    match (topology, mode) {
        (Topology::FlattenedButterfly, CostMode::Corrected) => ((dx > 0) as i64 + (dy > 0) as i64) as f64,
        _ => (dx + dy) as f64,
    }
}

/// Optimum of the placement objective by enumerating every injective,
/// constraint-satisfying assignment. `None` when no assignment exists.
pub fn exhaustive_optimum(tg: &TopologyGraph, grid: GridSpec, mode: CostMode, constraints: ConstraintMode) -> Option<f64> {
    let cells: Vec<Coord> = (0..grid.width).flat_map(|x| (0..grid.height).map(move |y| Coord { x, y })).collect();
    let mut assign: Vec<Option<Coord>> = vec![None; tg.nodes.len()];
    let mut used = vec![false; cells.len()];
    let mut best: Option<f64> = None;

    #[allow(clippy::too_many_arguments)]
    fn rec(
        i: usize,
        tg: &TopologyGraph,
        grid: GridSpec,
        mode: CostMode,
        constraints: ConstraintMode,
        cells: &[Coord],
        used: &mut [bool],
        assign: &mut [Option<Coord>],
        best: &mut Option<f64>,
    ) {
        if i == assign.len() {
            let total: f64 = tg.edges.iter().map(|&(a, b, w)| w * hop_cost(grid.topology, mode, assign[a].unwrap(), assign[b].unwrap())).sum();
            if best.is_none_or(|b| total < b) {
                *best = Some(total);
            }
            return;
        }
        for (ci, &c) in cells.iter().enumerate() {
            if used[ci] || !cell_allowed(constraints, tg.nodes[i].index, c.x, c.y, grid.height) {
                continue;
            }
            used[ci] = true;
            assign[i] = Some(c);
            rec(i + 1, tg, grid, mode, constraints, cells, used, assign, best);
            assign[i] = None;
            used[ci] = false;
        }
    }
    rec(0, tg, grid, mode, constraints, &cells, &mut used, &mut assign, &mut best);
    best
}

/// Random affinity graph with `nodes` nodes, random indices 1..=4 and
/// dyadic weights (sums stay exact in floating point).
pub fn random_topology(rng: &mut ChaCha8Rng, nodes: usize) -> TopologyGraph {
    let list: Vec<TopoNode> = (0..nodes)
        .map(|i| TopoNode { shard: i as u32, index: rng.gen_range(1..=4), rank: rng.gen_range(0..3), group: rng.gen_range(0..2) })
        .collect();
    let mut pairs = Vec::new();
    for a in 0..nodes {
        for b in a + 1..nodes {
            if rng.gen_bool(0.5) {
                pairs.push((a, b, rng.gen_range(1..=16) as f64 / 4.0));
            }
        }
    }
    TopologyGraph::new(list, pairs)
}

/// Random placement problem setting: grid of at most 3x3 holding `nodes`.
pub fn random_setting(rng: &mut ChaCha8Rng, nodes: usize) -> (GridSpec, CostMode, ConstraintMode) {
    let (w, h) = loop {
        let w = rng.gen_range(1..=3);
        let h = rng.gen_range(1..=3);
        if (w * h) as usize >= nodes {
            break (w, h);
        }
    };
    let topology = if rng.gen_bool(0.5) { Topology::Mesh2D } else { Topology::FlattenedButterfly };
    let mode = if rng.gen_bool(0.5) { CostMode::Paper } else { CostMode::Corrected };
    let constraints = if rng.gen_bool(0.5) { ConstraintMode::Literal } else { ConstraintMode::StrictBand };
    (GridSpec::new(w, h, topology), mode, constraints)
}

/// Sorted-by-degree order restated: descending out-degree, ascending id.
fn degree_order(g: &Graph) -> Vec<u32> {
    let mut vs: Vec<u32> = (0..g.num_vertices() as u32).collect();
    vs.sort_by_key(|&v| (std::cmp::Reverse(g.out_degree(v)), v));
    vs
}

pub fn check_partition_invariants(g: &Graph, pmap: &PartitionMap, k: usize) -> Result<(), String> {
    let shards = pmap.shards();
    // Exactness.
    for kind in ShardKind::ALL {
        let domain = if kind.holds_edges() { g.num_edges() } else { g.num_vertices() };
        let mut seen = vec![false; domain];
        for s in shards.iter().filter(|s| s.kind == kind) {
            for &item in &s.contents {
                if item >= domain || seen[item] {
                    return Err(format!("{kind}: item {item} duplicated or out of range"));
                }
                seen[item] = true;
            }
            if s.contents.len() > s.capacity {
                return Err(format!("shard {} over capacity", s.id));
            }
        }
        if seen.iter().any(|x| !x) {
            return Err(format!("{kind}: not every item covered"));
        }
    }
    // Mirror.
    for s in shards {
        let m = pmap.shard(pmap.mirror_of(s.id));
        if m.kind != s.kind.mirror() || m.contents != s.contents || m.rank != s.rank || m.class != s.class {
            return Err(format!("shard {} and its mirror differ", s.id));
        }
        let partners = shards.iter().filter(|o| o.kind == s.kind.mirror() && o.contents == s.contents && o.rank == s.rank).count();
        if partners != 1 {
            return Err(format!("shard {} has {partners} mirrors", s.id));
        }
    }
    // Modulo and rank alignment.
    for (pos, &v) in degree_order(g).iter().enumerate() {
        let class = pmap.shard(pmap.vertex_prop_shard(v)).class;
        if class as usize != pos % k {
            return Err(format!("vertex {v} at position {pos} in class {class}"));
        }
        for e in g.out_edge_range(v) {
            if pmap.shard(pmap.edge_table_shard(e)).class != class {
                return Err(format!("edge {e} not in its source's class"));
            }
        }
    }
    // Shared rank within a co-rank group equals the group's minimum member.
    for kind in ShardKind::ALL {
        for class in 0..k as u32 {
            let group: Vec<_> = shards.iter().filter(|s| s.kind == kind && s.class == class).collect();
            let ranks: BTreeSet<u32> = group.iter().map(|s| s.rank).collect();
            if ranks.len() > 1 {
                return Err(format!("{kind} class {class} has ranks {ranks:?}"));
            }
            let min_member = group
                .iter()
                .flat_map(|s| s.contents.iter())
                .map(|&item| if kind.holds_edges() { g.source_of(item) } else { item as u32 })
                .min();
            if let (Some(min), Some(rank)) = (min_member, ranks.first()) {
                if min != *rank {
                    return Err(format!("{kind} class {class}: rank {rank} but minimum member {min}"));
                }
            }
        }
    }
    Ok(())
}

/// Relative paths of all files under `root`, sorted.
pub fn files_under(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}
