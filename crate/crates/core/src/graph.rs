//! Directed weighted graphs in compressed adjacency form, edge-list ingestion,
//! a seeded power-law generator and degree-skew analytics.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::GraphError;

pub type VertexId = u32;
pub type EdgeId = usize;

/// Immutable directed graph.
///
/// Out-edges are stored contiguously per source, sorted by destination id
/// (then weight), so an edge id is simply its position in that order. An
/// in-edge index (edge ids grouped by destination, ascending source) is kept
/// alongside for the reduce phase.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
    weights: Vec<f64>,
    in_offsets: Vec<usize>,
    in_edges: Vec<EdgeId>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub src: VertexId,
    pub dst: VertexId,
    pub weight: f64,
}

impl Graph {
    /// Builds the canonical form from an arbitrary list of `(src, dst, weight)`.
    pub fn from_edges(num_vertices: usize, edges: &[(VertexId, VertexId, f64)]) -> Result<Self, GraphError> {
        let mut sorted = edges.to_vec();
        for &(s, d, w) in &sorted {
            let max = s.max(d) as usize;
            if max >= num_vertices {
                return Err(GraphError::VertexOutOfRange { id: max as u64, num_vertices });
            }
            if !w.is_finite() {
                return Err(GraphError::NonFiniteWeight);
            }
        }
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));

        let mut offsets = vec![0usize; num_vertices + 1];
        for &(s, _, _) in &sorted {
            offsets[s as usize + 1] += 1;
        }
        for v in 0..num_vertices {
            offsets[v + 1] += offsets[v];
        }
        let targets: Vec<VertexId> = sorted.iter().map(|e| e.1).collect();
        let weights: Vec<f64> = sorted.iter().map(|e| e.2).collect();

        let mut in_offsets = vec![0usize; num_vertices + 1];
        for &d in &targets {
            in_offsets[d as usize + 1] += 1;
        }
        for v in 0..num_vertices {
            in_offsets[v + 1] += in_offsets[v];
        }
        // Edge ids are visited in ascending order, so each destination bucket
        // ends up ordered by source id.
        let mut cursor = in_offsets.clone();
        let mut in_edges = vec![0usize; targets.len()];
        for (e, &d) in targets.iter().enumerate() {
            in_edges[cursor[d as usize]] = e;
            cursor[d as usize] += 1;
        }

        Ok(Self { offsets, targets, weights, in_offsets, in_edges })
    }

    pub fn empty(num_vertices: usize) -> Self {
        Self::from_edges(num_vertices, &[]).expect("no edges to validate")
    }

    pub fn num_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.targets.len()
    }

    pub fn out_degree(&self, v: VertexId) -> usize {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }

    pub fn in_degree(&self, v: VertexId) -> usize {
        self.in_offsets[v as usize + 1] - self.in_offsets[v as usize]
    }

    /// Edge ids of `v`'s out-edges, a contiguous range.
    pub fn out_edge_range(&self, v: VertexId) -> std::ops::Range<EdgeId> {
        self.offsets[v as usize]..self.offsets[v as usize + 1]
    }

    pub fn out_neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.targets[self.out_edge_range(v)]
    }

    /// Edge ids of `v`'s in-edges, ordered by source id.
    pub fn in_edge_ids(&self, v: VertexId) -> &[EdgeId] {
        &self.in_edges[self.in_offsets[v as usize]..self.in_offsets[v as usize + 1]]
    }

    pub fn edge(&self, e: EdgeId) -> Edge {
        Edge { src: self.source_of(e), dst: self.targets[e], weight: self.weights[e] }
    }

    pub fn target(&self, e: EdgeId) -> VertexId {
        self.targets[e]
    }

    pub fn weight(&self, e: EdgeId) -> f64 {
        self.weights[e]
    }

    /// Source of edge `e` by binary search over the offsets.
    pub fn source_of(&self, e: EdgeId) -> VertexId {
        (self.offsets.partition_point(|&o| o <= e) - 1) as VertexId
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..self.num_vertices() as VertexId).flat_map(move |u| {
            self.out_edge_range(u).map(move |e| Edge { src: u, dst: self.targets[e], weight: self.weights[e] })
        })
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn has_negative_weight(&self) -> bool {
        self.weights.iter().any(|&w| w < 0.0)
    }

    /// Copy of the graph with integer weights drawn uniformly from `1..=max_weight`.
    pub fn with_random_weights(&self, seed: u64, max_weight: u32) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let max_weight = max_weight.max(1);
        let mut g = self.clone();
        for w in &mut g.weights {
            *w = rng.gen_range(1..=max_weight) as f64;
        }
        // Sorting key includes the weight; re-canonicalise parallel edges.
        let edges: Vec<_> = g.edges().map(|e| (e.src, e.dst, e.weight)).collect();
        Self::from_edges(g.num_vertices(), &edges).expect("ids already validated")
    }

    /// Writes the graph as a SNAP-style edge list with a `# Nodes:` header so
    /// trailing isolated vertices survive a reload.
    pub fn write_edge_list<W: Write>(&self, mut out: W, weighted: bool) -> io::Result<()> {
        writeln!(out, "# Nodes: {} Edges: {}", self.num_vertices(), self.num_edges())?;
        for e in self.edges() {
            if weighted {
                writeln!(out, "{} {} {}", e.src, e.dst, e.weight)?;
            } else {
                writeln!(out, "{} {}", e.src, e.dst)?;
            }
        }
        Ok(())
    }

    pub fn save_edge_list(&self, path: &Path, weighted: bool) -> io::Result<()> {
        let mut buf = Vec::new();
        self.write_edge_list(&mut buf, weighted)?;
        fs::write(path, buf)
    }
}

/// Options for [`load_edge_list_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct EdgeListOptions {
    pub weighted: bool,
    /// Renumber the ids that actually occur to `0..N` (ascending original id).
    pub densify: bool,
}

/// A loaded graph plus, when densified, the original id of every vertex.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Graph,
    pub original_ids: Option<Vec<u64>>,
}

pub fn load_edge_list(path: &Path, weighted: bool) -> Result<Graph, GraphError> {
    Ok(load_edge_list_with(path, EdgeListOptions { weighted, densify: false })?.graph)
}

pub fn load_edge_list_with(path: &Path, opts: EdgeListOptions) -> Result<LoadedGraph, GraphError> {
    let text = fs::read_to_string(path).map_err(|source| GraphError::Io { path: path.display().to_string(), source })?;
    parse_edge_list(&text, opts)
}

/// Parses SNAP-style edge-list text.
pub fn parse_edge_list(text: &str, opts: EdgeListOptions) -> Result<LoadedGraph, GraphError> {
    let mut header_nodes: Option<usize> = None;
    let mut raw: Vec<(u64, u64, f64)> = Vec::new();

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(n) = parse_nodes_header(comment) {
                header_nodes = Some(n);
            }
            continue;
        }
        let mut cols = trimmed.split_whitespace();
        let src = parse_id(cols.next(), line_no)?;
        let dst = parse_id(cols.next(), line_no)?;
        let weight = if opts.weighted {
            let tok = cols.next().ok_or(GraphError::MissingWeight { line: line_no })?;
            let w: f64 = tok.parse().map_err(|_| GraphError::Malformed { line: line_no, reason: format!("bad weight {tok:?}") })?;
            if !w.is_finite() {
                return Err(GraphError::Malformed { line: line_no, reason: "non-finite weight".into() });
            }
            w
        } else {
            1.0
        };
        raw.push((src, dst, weight));
    }

    if opts.densify {
        let mut ids: Vec<u64> = raw.iter().flat_map(|&(s, d, _)| [s, d]).collect();
        ids.sort_unstable();
        ids.dedup();
        let edges: Vec<_> = raw
            .iter()
            .map(|&(s, d, w)| {
                let s = ids.binary_search(&s).expect("collected") as VertexId;
                let d = ids.binary_search(&d).expect("collected") as VertexId;
                (s, d, w)
            })
            .collect();
        let graph = Graph::from_edges(ids.len(), &edges)?;
        return Ok(LoadedGraph { graph, original_ids: Some(ids) });
    }

    let max_id = raw.iter().map(|&(s, d, _)| s.max(d)).max();
    let implied = max_id.map_or(0, |m| m as usize + 1);
    let num_vertices = match header_nodes {
        Some(n) if n < implied => {
            return Err(GraphError::VertexOutOfRange { id: max_id.unwrap_or(0), num_vertices: n });
        }
        Some(n) => n,
        None => implied,
    };
    if num_vertices > VertexId::MAX as usize {
        return Err(GraphError::TooManyVertices(num_vertices));
    }
    let edges: Vec<_> = raw.iter().map(|&(s, d, w)| (s as VertexId, d as VertexId, w)).collect();
    Ok(LoadedGraph { graph: Graph::from_edges(num_vertices, &edges)?, original_ids: None })
}

fn parse_id(tok: Option<&str>, line: usize) -> Result<u64, GraphError> {
    let tok = tok.ok_or_else(|| GraphError::Malformed { line, reason: "expected two vertex ids".into() })?;
    tok.parse().map_err(|_| GraphError::Malformed { line, reason: format!("bad vertex id {tok:?}") })
}

/// Recognises `Nodes: N` inside a SNAP header comment.
fn parse_nodes_header(comment: &str) -> Option<usize> {
    let mut toks = comment.split_whitespace();
    while let Some(t) = toks.next() {
        if t == "Nodes:" {
            return toks.next()?.parse().ok();
        }
    }
    None
}

/// Parameters of [`generate_power_law_graph`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawParams {
    pub num_vertices: usize,
    pub avg_degree: f64,
    pub skew: f64,
    pub seed: u64,
}

/// Seeded power-law generator.
///
/// Out-degrees follow a truncated discrete power law `n(d) ∝ d^-skew` on
/// `[d_min, d_max]`, assigned by stratified inverse-CDF sampling so the
/// histogram tracks the law closely. The cutoff starts at the natural
/// `sqrt(N * avg_degree)`; vertices left over once the edge budget is spent
/// are sinks. Destinations are drawn Chung-Lu style with probability
/// proportional to the destination's own out-degree, so hubs are hubs in both
/// directions. The top decile of vertices holds most edges for `skew <= 2`;
/// steeper laws are light-tailed by construction.
pub fn generate_power_law_graph(params: PowerLawParams) -> Result<Graph, GraphError> {
    let PowerLawParams { num_vertices: n, avg_degree, skew, seed } = params;
    if n == 0 {
        return Err(GraphError::InvalidParameter("num_vertices must be >= 1".into()));
    }
    if !(avg_degree >= 0.0 && avg_degree.is_finite()) {
        return Err(GraphError::InvalidParameter("avg_degree must be >= 0".into()));
    }
    if !(skew > 0.0 && skew.is_finite()) {
        return Err(GraphError::InvalidParameter("skew must be > 0".into()));
    }
    if n > VertexId::MAX as usize {
        return Err(GraphError::TooManyVertices(n));
    }
    let target_edges = (n as f64 * avg_degree).round() as usize;
    if target_edges == 0 {
        return Ok(Graph::empty(n));
    }

    let (d_min, d_max) = degree_support(n, avg_degree, skew);
    let law = TruncatedPowerLaw::new(d_min, d_max, skew);
    let mean = law.mean();
    let active = ((avg_degree / mean) * n as f64).round().clamp(1.0, n as f64) as usize;

    let mut degrees: Vec<usize> = (0..active).map(|i| law.quantile((i as f64 + 0.5) / active as f64)).collect();
    degrees.resize(n, 0);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    degrees.shuffle(&mut rng);

    // Cumulative weights for destination sampling.
    let mut cumulative = Vec::with_capacity(n);
    let mut acc = 0u64;
    for &d in &degrees {
        acc += d as u64;
        cumulative.push(acc);
    }
    let total = acc;

    let mut edges = Vec::with_capacity(degrees.iter().sum());
    for (u, &d) in degrees.iter().enumerate() {
        for _ in 0..d {
            let pick = rng.gen_range(0..total);
            let v = cumulative.partition_point(|&c| c <= pick);
            edges.push((u as VertexId, v as VertexId, 1.0));
        }
    }
    Graph::from_edges(n, &edges)
}

/// Chooses `[d_min, d_max]` so the law's mean reaches `avg_degree`.
fn degree_support(n: usize, avg_degree: f64, skew: f64) -> (usize, usize) {
    let total = n as f64 * avg_degree;
    let cap = (total.ceil() as usize).max(1);
    let mut d_max = (total.sqrt().ceil() as usize).clamp(1, cap);
    while TruncatedPowerLaw::new(1, d_max, skew).mean() < avg_degree && d_max < cap {
        d_max = (d_max * 2).min(cap);
    }
    let mut d_min = 1;
    while TruncatedPowerLaw::new(d_min, d_max, skew).mean() < avg_degree && d_min < d_max {
        d_min += 1;
    }
    (d_min, d_max)
}

struct TruncatedPowerLaw {
    d_min: usize,
    cdf: Vec<f64>,
    mean: f64,
}

impl TruncatedPowerLaw {
    fn new(d_min: usize, d_max: usize, skew: f64) -> Self {
        let masses: Vec<f64> = (d_min..=d_max).map(|d| (d as f64).powf(-skew)).collect();
        let z: f64 = masses.iter().sum();
        let mean = (d_min..=d_max).zip(&masses).map(|(d, m)| d as f64 * m).sum::<f64>() / z;
        let mut acc = 0.0;
        let cdf = masses
            .iter()
            .map(|m| {
                acc += m / z;
                acc
            })
            .collect();
        Self { d_min, cdf, mean }
    }

    fn mean(&self) -> f64 {
        self.mean
    }

    fn quantile(&self, q: f64) -> usize {
        let idx = self.cdf.partition_point(|&c| c < q).min(self.cdf.len() - 1);
        self.d_min + idx
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DegreeDirection {
    #[default]
    Out,
    In,
}

/// `n(d)`: number of vertices with degree `d`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DegreeHistogram {
    pub entries: BTreeMap<usize, usize>,
}

impl DegreeHistogram {
    pub fn total_vertices(&self) -> usize {
        self.entries.values().sum()
    }
}

impl FromIterator<(usize, usize)> for DegreeHistogram {
    fn from_iter<T: IntoIterator<Item = (usize, usize)>>(iter: T) -> Self {
        Self { entries: iter.into_iter().collect() }
    }
}

pub fn degree_histogram(g: &Graph, direction: DegreeDirection) -> DegreeHistogram {
    let mut entries = BTreeMap::new();
    for v in 0..g.num_vertices() as VertexId {
        let d = match direction {
            DegreeDirection::Out => g.out_degree(v),
            DegreeDirection::In => g.in_degree(v),
        };
        *entries.entry(d).or_insert(0) += 1;
    }
    DegreeHistogram { entries }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub r_squared: f64,
}

/// Least-squares line through `(ln d, ln n(d))` over entries with `d > 0` and
/// `n(d) > 0`; `alpha` is the negated slope.
pub fn fit_power_law(h: &DegreeHistogram) -> Result<PowerLawFit, GraphError> {
    let pts: Vec<(f64, f64)> = h
        .entries
        .iter()
        .filter(|&(&d, &c)| d > 0 && c > 0)
        .map(|(&d, &c)| ((d as f64).ln(), (c as f64).ln()))
        .collect();
    if pts.len() < 3 {
        return Err(GraphError::InsufficientSupport { points: pts.len() });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let alpha = -slope;
    if !(alpha > 0.0) {
        return Err(GraphError::NonPositiveSlope { alpha });
    }
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(PowerLawFit { alpha, r_squared })
}

/// Cumulative share of edges covered by the top-k vertices by out-degree, for
/// k = 1..=N. Point k is `(k / N, covered / M)`.
pub fn edge_coverage_curve(g: &Graph) -> Result<Vec<(f64, f64)>, GraphError> {
    if g.num_edges() == 0 {
        return Err(GraphError::EmptyGraph);
    }
    let mut degrees = g.out_degrees();
    degrees.sort_unstable_by(|a, b| b.cmp(a));
    let n = g.num_vertices() as f64;
    let m = g.num_edges() as f64;
    let mut covered = 0usize;
    Ok(degrees
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            covered += d;
            ((k + 1) as f64 / n, covered as f64 / m)
        })
        .collect())
}

/// Edge share covered by the top `fraction` of vertices (rounded up).
pub fn top_vertex_edge_share(g: &Graph, fraction: f64) -> Result<f64, GraphError> {
    let curve = edge_coverage_curve(g)?;
    let k = ((fraction * g.num_vertices() as f64).ceil() as usize).clamp(1, curve.len());
    Ok(curve[k - 1].1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, weighted: bool) -> Result<Graph, GraphError> {
        parse_edge_list(text, EdgeListOptions { weighted, densify: false }).map(|l| l.graph)
    }

    #[test]
    fn loads_small_file_with_comment() {
        let g = parse("# c\n0 1\n1 2", false).unwrap();
        assert_eq!(g.num_vertices(), 3);
        assert_eq!(g.num_edges(), 2);
    }

    #[test]
    fn comment_only_file_is_empty_graph() {
        let g = parse("# nothing here\n# at all\n", false).unwrap();
        assert_eq!(g.num_vertices(), 0);
        assert_eq!(g.num_edges(), 0);
        let g = parse("", true).unwrap();
        assert_eq!(g.num_vertices(), 0);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        match parse("0 1\n1 x\n", false) {
            Err(GraphError::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match parse("0 1\n7\n", false) {
            Err(GraphError::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_weight_is_an_error_when_weighted() {
        match parse("0 1 2.5\n1 2\n", true) {
            Err(GraphError::MissingWeight { line }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn header_overrides_vertex_count() {
        let g = parse("# Nodes: 10 Edges: 1\n0 1\n", false).unwrap();
        assert_eq!(g.num_vertices(), 10);
        assert!(parse("# Nodes: 2 Edges: 1\n0 5\n", false).is_err());
    }

    #[test]
    fn parallel_edges_and_self_loops_are_kept() {
        let g = parse("0 1\n0 1\n2 2\n", false).unwrap();
        assert_eq!(g.num_edges(), 3);
        assert_eq!(g.out_neighbors(0), &[1, 1]);
        assert_eq!(g.out_neighbors(2), &[2]);
    }

    #[test]
    fn densify_renumbers_gaps() {
        let l = parse_edge_list("10 30\n30 20\n", EdgeListOptions { weighted: false, densify: true }).unwrap();
        assert_eq!(l.graph.num_vertices(), 3);
        assert_eq!(l.original_ids.as_deref(), Some(&[10u64, 20, 30][..]));
        assert_eq!(l.graph.out_neighbors(0), &[2]);
        assert_eq!(l.graph.out_neighbors(2), &[1]);
    }

    #[test]
    fn canonical_order_and_in_index() {
        let g = Graph::from_edges(4, &[(2, 0, 1.0), (0, 3, 1.0), (0, 1, 1.0), (3, 0, 1.0)]).unwrap();
        assert_eq!(g.out_neighbors(0), &[1, 3]);
        let srcs: Vec<_> = g.in_edge_ids(0).iter().map(|&e| g.source_of(e)).collect();
        assert_eq!(srcs, vec![2, 3]);
        assert_eq!(g.num_edges(), g.out_degrees().iter().sum::<usize>());
    }

    #[test]
    fn out_of_range_edge_rejected() {
        assert!(Graph::from_edges(2, &[(0, 2, 1.0)]).is_err());
    }

    #[test]
    fn histogram_examples() {
        let path = Graph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let h = degree_histogram(&path, DegreeDirection::Out);
        assert_eq!(h.entries, BTreeMap::from([(0, 1), (1, 2)]));
        let star = Graph::from_edges(4, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap();
        let h = degree_histogram(&star, DegreeDirection::Out);
        assert_eq!(h.entries, BTreeMap::from([(0, 3), (3, 1)]));
        let h = degree_histogram(&star, DegreeDirection::In);
        assert_eq!(h.entries, BTreeMap::from([(0, 1), (1, 3)]));
    }

    #[test]
    fn fit_errors() {
        let flat: DegreeHistogram = [(1, 7), (2, 7), (3, 7)].into_iter().collect();
        assert!(matches!(fit_power_law(&flat), Err(GraphError::NonPositiveSlope { .. })));
        let short: DegreeHistogram = [(1, 5), (2, 3)].into_iter().collect();
        assert!(matches!(fit_power_law(&short), Err(GraphError::InsufficientSupport { points: 2 })));
        // Zero-degree entries do not count as support.
        let zeros: DegreeHistogram = [(0, 100), (1, 5), (2, 3)].into_iter().collect();
        assert!(matches!(fit_power_law(&zeros), Err(GraphError::InsufficientSupport { .. })));
    }

    #[test]
    fn coverage_examples() {
        let star = Graph::from_edges(4, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap();
        let c = edge_coverage_curve(&star).unwrap();
        assert_eq!(c[0], (0.25, 1.0));
        assert_eq!(*c.last().unwrap(), (1.0, 1.0));

        let ring = Graph::from_edges(4, &[(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0), (2, 0, 1.0), (3, 0, 1.0), (3, 1, 1.0)]).unwrap();
        let c = edge_coverage_curve(&ring).unwrap();
        assert_eq!(c[1], (0.5, 0.5));
        assert!(matches!(edge_coverage_curve(&Graph::empty(3)), Err(GraphError::EmptyGraph)));
    }

    #[test]
    fn generator_trivial_cases() {
        let g = generate_power_law_graph(PowerLawParams { num_vertices: 1, avg_degree: 0.0, skew: 1.0, seed: 42 }).unwrap();
        assert_eq!((g.num_vertices(), g.num_edges()), (1, 0));
        assert!(generate_power_law_graph(PowerLawParams { num_vertices: 0, avg_degree: 1.0, skew: 1.0, seed: 1 }).is_err());
        assert!(generate_power_law_graph(PowerLawParams { num_vertices: 5, avg_degree: 1.0, skew: 0.0, seed: 1 }).is_err());
    }

    #[test]
    fn random_weights_are_in_range_and_seeded() {
        let g = generate_power_law_graph(PowerLawParams { num_vertices: 200, avg_degree: 4.0, skew: 1.0, seed: 3 }).unwrap();
        let a = g.with_random_weights(9, 10);
        let b = g.with_random_weights(9, 10);
        assert_eq!(a, b);
        assert!(a.edges().all(|e| (1.0..=10.0).contains(&e.weight)));
        assert_eq!(a.num_edges(), g.num_edges());
    }

    #[test]
    fn write_then_parse_round_trips() {
        let g = Graph::from_edges(6, &[(0, 1, 2.5), (0, 1, 0.5), (3, 3, 1.0), (4, 0, 7.0)]).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf, true).unwrap();
        let back = parse(std::str::from_utf8(&buf).unwrap(), true).unwrap();
        assert_eq!(back, g);
    }
}
