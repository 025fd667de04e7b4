//! Degree-sorted, modulo-scheduled source-cut partitioning.
//!
//! Vertices are sorted by descending out-degree and dealt to `K` cyclic
//! classes. Each class owns four kinds of shard: the Edge Table and Edge
//! Property shards hold the out-edges of the class's vertices, the Vertex
//! Property and Vertex Temp shards hold the vertices themselves. Every kind is
//! split into capacity-bounded sub-shards; all shards of a class form one
//! co-rank group.

use std::fmt;
use std::io::{self, Write};

use crate::error::{EngineError, PartitionError};
use crate::graph::{EdgeId, Graph, VertexId};

pub type ShardId = u32;

/// Data-structure kind held by a shard; the discriminant is the shard index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShardKind {
    EdgeTable = 1,
    VertexProp = 2,
    VertexTemp = 3,
    EdgeProp = 4,
}

impl ShardKind {
    pub const ALL: [ShardKind; 4] = [ShardKind::EdgeTable, ShardKind::VertexProp, ShardKind::VertexTemp, ShardKind::EdgeProp];

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(index: u8) -> Option<Self> {
        match index {
            1 => Some(Self::EdgeTable),
            2 => Some(Self::VertexProp),
            3 => Some(Self::VertexTemp),
            4 => Some(Self::EdgeProp),
            _ => None,
        }
    }

    pub fn holds_edges(self) -> bool {
        matches!(self, Self::EdgeTable | Self::EdgeProp)
    }

    /// The kind holding the same contents (1 <-> 4, 2 <-> 3).
    pub fn mirror(self) -> Self {
        match self {
            Self::EdgeTable => Self::EdgeProp,
            Self::EdgeProp => Self::EdgeTable,
            Self::VertexProp => Self::VertexTemp,
            Self::VertexTemp => Self::VertexProp,
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Self::EdgeTable => "et",
            Self::VertexProp => "vprop",
            Self::VertexTemp => "vtemp",
            Self::EdgeProp => "eprop",
        }
    }
}

impl fmt::Display for ShardKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shard {
    pub id: ShardId,
    pub kind: ShardKind,
    /// Minimum vertex id of the co-rank group for this kind (source ids for
    /// edge shards). Shared by every sub-shard of the group.
    pub rank: VertexId,
    /// Cyclic class, i.e. the co-rank group.
    pub class: u32,
    /// Edge ids for kinds 1 and 4, vertex ids for kinds 2 and 3.
    pub contents: Vec<usize>,
    pub capacity: usize,
}

impl Shard {
    pub fn size(&self) -> usize {
        self.contents.len()
    }
}

/// How sorted vertices are dealt to classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModuloMode {
    /// Class = position in the degree-sorted order mod K.
    #[default]
    SortedPosition,
    /// Class = raw vertex id mod K.
    RawId,
}

pub const EDGE_RECORD_BYTES: usize = 16;
pub const VERTEX_RECORD_BYTES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartitionConfig {
    pub clusters: usize,
    pub capacity_edges: usize,
    pub capacity_vertices: usize,
    pub modulo: ModuloMode,
}

impl PartitionConfig {
    pub fn new(clusters: usize, capacity_edges: usize, capacity_vertices: usize) -> Self {
        Self { clusters, capacity_edges, capacity_vertices, modulo: ModuloMode::SortedPosition }
    }

    /// Capacities derived from the per-engine memory size, with 16-byte edge
    /// records and 8-byte vertex records.
    pub fn from_engine_bytes(clusters: usize, engine_bytes: usize) -> Self {
        Self::new(clusters, engine_bytes / EDGE_RECORD_BYTES, engine_bytes / VERTEX_RECORD_BYTES)
    }
}

/// Output of [`partition`]: all shards plus item-to-shard lookups.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionMap {
    shards: Vec<Shard>,
    clusters: usize,
    order: Vec<VertexId>,
    vertex_class: Vec<u32>,
    edge_table: Vec<ShardId>,
    edge_prop: Vec<ShardId>,
    vertex_prop: Vec<ShardId>,
    vertex_temp: Vec<ShardId>,
    mirror: Vec<ShardId>,
    node_of: Vec<u32>,
}

impl PartitionMap {
    pub fn shards(&self) -> &[Shard] {
        &self.shards
    }

    pub fn shard(&self, id: ShardId) -> &Shard {
        &self.shards[id as usize]
    }

    pub fn num_shards(&self) -> usize {
        self.shards.len()
    }

    pub fn clusters(&self) -> usize {
        self.clusters
    }

    /// Degree-sorted vertex permutation used to deal classes.
    pub fn sorted_order(&self) -> &[VertexId] {
        &self.order
    }

    pub fn class_of_vertex(&self, v: VertexId) -> u32 {
        self.vertex_class[v as usize]
    }

    pub fn num_edges(&self) -> usize {
        self.edge_table.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertex_prop.len()
    }

    pub fn edge_table_shard(&self, e: EdgeId) -> ShardId {
        self.edge_table[e]
    }

    pub fn edge_prop_shard(&self, e: EdgeId) -> ShardId {
        self.edge_prop[e]
    }

    pub fn vertex_prop_shard(&self, v: VertexId) -> ShardId {
        self.vertex_prop[v as usize]
    }

    pub fn vertex_temp_shard(&self, v: VertexId) -> ShardId {
        self.vertex_temp[v as usize]
    }

    pub fn mirror_of(&self, s: ShardId) -> ShardId {
        self.mirror[s as usize]
    }

    /// Engine node hosting a shard. Identity unless shards were co-located.
    pub fn node_of(&self, s: ShardId) -> u32 {
        self.node_of[s as usize]
    }

    pub fn colocated(&self, a: ShardId, b: ShardId) -> bool {
        self.node_of(a) == self.node_of(b)
    }

    /// Puts shards on shared engine nodes; `node_of[s]` is the node of shard `s`.
    /// Traffic between shards on the same node is local and never traced.
    pub fn with_colocation(mut self, node_of: Vec<u32>) -> Self {
        assert_eq!(node_of.len(), self.shards.len(), "one node per shard");
        self.node_of = node_of;
        self
    }

    /// Checks that the map covers exactly the edges and vertices of `g`.
    pub fn check_covers(&self, g: &Graph) -> Result<(), EngineError> {
        if self.num_vertices() != g.num_vertices() {
            let v = self.num_vertices().min(g.num_vertices());
            return Err(EngineError::UnmappedVertex(v as VertexId));
        }
        if self.num_edges() != g.num_edges() {
            return Err(EngineError::UnmappedEdge(self.num_edges().min(g.num_edges())));
        }
        Ok(())
    }

    /// Writes `shard_id,kind,rank,class,size,capacity`.
    pub fn write_shards_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "shard_id,kind,rank,class,size,capacity")?;
        for s in &self.shards {
            writeln!(out, "{},{},{},{},{},{}", s.id, s.kind.index(), s.rank, s.class, s.size(), s.capacity)?;
        }
        Ok(())
    }

    /// Writes `item_id,kind,shard_id`; item ids are edge ids for kinds 1 and 4
    /// and vertex ids for kinds 2 and 3.
    pub fn write_membership_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "item_id,kind,shard_id")?;
        for s in &self.shards {
            for &item in &s.contents {
                writeln!(out, "{},{},{}", item, s.kind.index(), s.id)?;
            }
        }
        Ok(())
    }
}

/// Descending out-degree, ties broken by ascending vertex id.
pub fn sort_vertices_by_degree(g: &Graph) -> Vec<VertexId> {
    let mut order: Vec<VertexId> = (0..g.num_vertices() as VertexId).collect();
    order.sort_by(|&a, &b| g.out_degree(b).cmp(&g.out_degree(a)).then(a.cmp(&b)));
    order
}

pub fn partition(g: &Graph, config: PartitionConfig) -> Result<PartitionMap, PartitionError> {
    let k = config.clusters;
    if k == 0 {
        return Err(PartitionError::ZeroClusters);
    }
    if config.capacity_edges == 0 && g.num_edges() > 0 {
        return Err(PartitionError::CapacityTooSmall { kind: "edge", capacity: 0 });
    }
    if config.capacity_vertices == 0 && g.num_vertices() > 0 {
        return Err(PartitionError::CapacityTooSmall { kind: "vertex", capacity: 0 });
    }

    let order = sort_vertices_by_degree(g);
    let mut class_vertices: Vec<Vec<VertexId>> = vec![Vec::new(); k];
    let mut vertex_class = vec![0u32; g.num_vertices()];
    for (pos, &v) in order.iter().enumerate() {
        let class = match config.modulo {
            ModuloMode::SortedPosition => pos % k,
            ModuloMode::RawId => v as usize % k,
        };
        class_vertices[class].push(v);
        vertex_class[v as usize] = class as u32;
    }

    let mut shards: Vec<Shard> = Vec::new();
    let mut mirror: Vec<ShardId> = Vec::new();
    let mut edge_table = vec![0; g.num_edges()];
    let mut edge_prop = vec![0; g.num_edges()];
    let mut vertex_prop = vec![0; g.num_vertices()];
    let mut vertex_temp = vec![0; g.num_vertices()];

    for (class, members) in class_vertices.iter().enumerate() {
        let class = class as u32;
        // Out-edges in source-sorted order (members are already in sorted position order).
        let edges: Vec<usize> = members.iter().flat_map(|&v| g.out_edge_range(v)).collect();
        let vertices: Vec<usize> = members.iter().map(|&v| v as usize).collect();

        let edge_rank = members.iter().copied().filter(|&v| g.out_degree(v) > 0).min();
        let vertex_rank = members.iter().copied().min();

        let et_chunks: Vec<&[usize]> = edges.chunks(config.capacity_edges.max(1)).collect();
        let v_chunks: Vec<&[usize]> = vertices.chunks(config.capacity_vertices.max(1)).collect();

        let mut push_group = |kind: ShardKind, chunks: &[&[usize]], rank: VertexId, capacity: usize| -> Vec<ShardId> {
            chunks
                .iter()
                .map(|chunk| {
                    let id = shards.len() as ShardId;
                    shards.push(Shard { id, kind, rank, class, contents: chunk.to_vec(), capacity });
                    mirror.push(0);
                    id
                })
                .collect()
        };

        let et_ids = edge_rank.map_or_else(Vec::new, |rank| push_group(ShardKind::EdgeTable, &et_chunks, rank, config.capacity_edges));
        let vp_ids = vertex_rank.map_or_else(Vec::new, |rank| push_group(ShardKind::VertexProp, &v_chunks, rank, config.capacity_vertices));
        let vt_ids = vertex_rank.map_or_else(Vec::new, |rank| push_group(ShardKind::VertexTemp, &v_chunks, rank, config.capacity_vertices));
        let ep_ids = edge_rank.map_or_else(Vec::new, |rank| push_group(ShardKind::EdgeProp, &et_chunks, rank, config.capacity_edges));

        for (&et, &ep) in et_ids.iter().zip(&ep_ids) {
            mirror[et as usize] = ep;
            mirror[ep as usize] = et;
            for &e in &shards[et as usize].contents {
                edge_table[e] = et;
                edge_prop[e] = ep;
            }
        }
        for (&vp, &vt) in vp_ids.iter().zip(&vt_ids) {
            mirror[vp as usize] = vt;
            mirror[vt as usize] = vp;
            for &v in &shards[vp as usize].contents {
                vertex_prop[v] = vp;
                vertex_temp[v] = vt;
            }
        }
    }

    let node_of = (0..shards.len() as u32).collect();
    Ok(PartitionMap {
        shards,
        clusters: k,
        order,
        vertex_class,
        edge_table,
        edge_prop,
        vertex_prop,
        vertex_temp,
        mirror,
        node_of,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassLoad {
    pub class: u32,
    pub edges: usize,
    pub vertices: usize,
}

/// Edge and vertex counts per cyclic class, counted from the shard contents.
pub fn class_load_profile(pmap: &PartitionMap) -> Vec<ClassLoad> {
    let mut loads: Vec<ClassLoad> = (0..pmap.clusters() as u32).map(|class| ClassLoad { class, edges: 0, vertices: 0 }).collect();
    for s in pmap.shards() {
        let load = &mut loads[s.class as usize];
        match s.kind {
            ShardKind::EdgeTable => load.edges += s.size(),
            ShardKind::VertexProp => load.vertices += s.size(),
            _ => {}
        }
    }
    loads
}

/// Max over mean class edge load; 1.0 for an edgeless graph.
pub fn edge_imbalance(loads: &[ClassLoad]) -> f64 {
    let total: usize = loads.iter().map(|l| l.edges).sum();
    if total == 0 || loads.is_empty() {
        return 1.0;
    }
    let max = loads.iter().map(|l| l.edges).max().unwrap_or(0) as f64;
    max / (total as f64 / loads.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    #[test]
    fn sort_examples() {
        // degrees [1,3,2]
        let g = Graph::from_edges(4, &[(0, 3, 1.0), (1, 0, 1.0), (1, 2, 1.0), (1, 3, 1.0), (2, 0, 1.0), (2, 1, 1.0)]).unwrap();
        assert_eq!(&sort_vertices_by_degree(&g)[..3], &[1, 2, 0]);

        let ring = Graph::from_edges(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap();
        assert_eq!(sort_vertices_by_degree(&ring), vec![0, 1, 2, 3]);

        let star = Graph::from_edges(4, &[(2, 0, 1.0), (2, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(sort_vertices_by_degree(&star)[0], 2);
    }

    #[test]
    fn single_cluster_has_one_shard_per_kind() {
        // Vertex 0 is a sink so the edge rank differs from the vertex rank.
        let g = Graph::from_edges(3, &[(1, 2, 1.0), (2, 0, 1.0)]).unwrap();
        let pm = partition(&g, PartitionConfig::new(1, 100, 100)).unwrap();
        assert_eq!(pm.num_shards(), 4);
        let by_kind = |k| pm.shards().iter().find(|s| s.kind == k).unwrap();
        assert_eq!(by_kind(ShardKind::EdgeTable).rank, 1);
        assert_eq!(by_kind(ShardKind::EdgeProp).rank, 1);
        assert_eq!(by_kind(ShardKind::VertexProp).rank, 0);
        assert_eq!(by_kind(ShardKind::VertexTemp).rank, 0);
        assert_eq!(class_load_profile(&pm), vec![ClassLoad { class: 0, edges: 2, vertices: 3 }]);
    }

    #[test]
    fn modulo_classes_follow_sorted_position() {
        // Vertex v has out-degree 8 - v, so the sorted order is the identity.
        let mut edges = Vec::new();
        for v in 0..8u32 {
            for t in 0..(8 - v) {
                edges.push((v, t % 8, 1.0));
            }
        }
        let g = Graph::from_edges(8, &edges).unwrap();
        let pm = partition(&g, PartitionConfig::new(4, 1000, 1000)).unwrap();
        for c in 0..4u32 {
            let vp = pm.shards().iter().find(|s| s.kind == ShardKind::VertexProp && s.class == c).unwrap();
            assert_eq!(vp.contents, vec![c as usize, c as usize + 4]);
        }
    }

    #[test]
    fn overflow_spawns_co_rank_sub_shards() {
        let g = path3();
        let pm = partition(&g, PartitionConfig::new(1, 1, 2)).unwrap();
        let et: Vec<_> = pm.shards().iter().filter(|s| s.kind == ShardKind::EdgeTable).collect();
        assert_eq!(et.len(), 2);
        assert!(et.iter().all(|s| s.rank == 0 && s.size() <= 1));
        let vp: Vec<_> = pm.shards().iter().filter(|s| s.kind == ShardKind::VertexProp).collect();
        assert_eq!(vp.len(), 2);
        assert!(vp.iter().all(|s| s.rank == 0));
        for s in pm.shards() {
            let m = pm.shard(pm.mirror_of(s.id));
            assert_eq!(m.contents, s.contents);
            assert_eq!(m.kind, s.kind.mirror());
        }
    }

    #[test]
    fn error_cases() {
        let g = path3();
        assert_eq!(partition(&g, PartitionConfig::new(0, 10, 10)), Err(PartitionError::ZeroClusters));
        assert!(matches!(partition(&g, PartitionConfig::new(1, 0, 10)), Err(PartitionError::CapacityTooSmall { .. })));
        assert!(matches!(partition(&g, PartitionConfig::new(1, 10, 0)), Err(PartitionError::CapacityTooSmall { .. })));
    }

    #[test]
    fn more_clusters_than_vertices_leaves_empty_classes() {
        let g = path3();
        let pm = partition(&g, PartitionConfig::new(5, 10, 10)).unwrap();
        let loads = class_load_profile(&pm);
        assert_eq!(loads.len(), 5);
        assert_eq!(loads[3], ClassLoad { class: 3, edges: 0, vertices: 0 });
        // Vertex 2 has no out-edges: its class gets vertex shards only.
        let class2: Vec<_> = pm.shards().iter().filter(|s| s.class == 2).map(|s| s.kind).collect();
        assert_eq!(class2, vec![ShardKind::VertexProp, ShardKind::VertexTemp]);
    }

    #[test]
    fn uniform_ring_splits_evenly() {
        let ring = Graph::from_edges(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap();
        let pm = partition(&ring, PartitionConfig::new(2, 10, 10)).unwrap();
        let loads = class_load_profile(&pm);
        assert_eq!(loads[0].edges, loads[1].edges);
        assert_eq!(loads[0].vertices, 2);
        assert_eq!(edge_imbalance(&loads), 1.0);
    }

    #[test]
    fn raw_id_modulo_switch() {
        let star = Graph::from_edges(4, &[(3, 0, 1.0), (3, 1, 1.0), (3, 2, 1.0)]).unwrap();
        let mut cfg = PartitionConfig::new(2, 10, 10);
        cfg.modulo = ModuloMode::RawId;
        let pm = partition(&star, cfg).unwrap();
        assert_eq!(pm.class_of_vertex(3), 1);
        assert_eq!(pm.class_of_vertex(2), 0);
    }

    #[test]
    fn csv_exports() {
        let pm = partition(&path3(), PartitionConfig::new(1, 10, 10)).unwrap();
        let mut buf = Vec::new();
        pm.write_shards_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("shard_id,kind,rank,class,size,capacity"));
        assert_eq!(text.lines().nth(1), Some("0,1,0,0,2,10"));
        let mut buf = Vec::new();
        pm.write_membership_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 2 + 3 + 3 + 2);
    }
}
