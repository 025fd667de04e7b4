use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: weight column missing")]
    MissingWeight { line: usize },
    #[error("vertex id {id} out of range for {num_vertices} vertices")]
    VertexOutOfRange { id: u64, num_vertices: usize },
    #[error("{0} vertices exceed the 32-bit id space")]
    TooManyVertices(usize),
    #[error("edge weight must be finite")]
    NonFiniteWeight,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("power-law fit needs at least 3 nonzero degrees, got {points}")]
    InsufficientSupport { points: usize },
    #[error("fitted slope gives alpha = {alpha}, expected alpha > 0")]
    NonPositiveSlope { alpha: f64 },
    #[error("graph has no edges")]
    EmptyGraph,
}

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("{algorithm} requires a source vertex")]
    MissingSource { algorithm: &'static str },
    #[error("source vertex {source_vertex} out of range for {num_vertices} vertices")]
    SourceOutOfRange { source_vertex: u32, num_vertices: usize },
    #[error("negative edge weight on edge {edge}")]
    NegativeWeight { edge: usize },
    #[error("edge {0} is not covered by the partition map")]
    UnmappedEdge(usize),
    #[error("vertex {0} is not covered by the partition map")]
    UnmappedVertex(u32),
    #[error("invalid algorithm parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum PartitionError {
    #[error("cluster count must be at least 1")]
    ZeroClusters,
    #[error("{kind} capacity {capacity} cannot hold a single item")]
    CapacityTooSmall { kind: &'static str, capacity: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum PlacementError {
    #[error("no constraint-satisfying placement exists on a {width}x{height} grid")]
    Infeasible { width: u32, height: u32 },
    #[error("grid {width}x{height} has fewer cells than the {nodes} nodes to place")]
    GridTooSmall { width: u32, height: u32, nodes: usize },
    #[error("trace references shard {0} unknown to the partition map")]
    TraceMismatch(u32),
    #[error("exact solving over {cells} cells exceeds the exhaustive threshold of {threshold}; enable branch and bound")]
    TooLargeForExact { cells: usize, threshold: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("shard {0} has no placement")]
    UnplacedShard(u32),
    #[error("invalid NoC parameter: {0}")]
    InvalidParameter(String),
}
