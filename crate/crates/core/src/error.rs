use alloc::vec::Vec;

/// Errors produced by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("region {0} duplicates an earlier region")]
    DuplicateRegion(usize),
    #[error("region {0} is empty")]
    EmptyRegion(usize),
    #[error("vertex {vertex} in region {region} is out of range (num_vertices = {num_vertices})")]
    VertexOutOfRange {
        region: usize,
        vertex: usize,
        num_vertices: usize,
    },
    #[error("invalid domain size {size} for vertex {vertex} (need at least 2)")]
    InvalidDomainSize { vertex: usize, size: usize },
    #[error(
        "region graph is not two-layer: region {inner} is strictly contained in region {outer}"
    )]
    NotTwoLayer { inner: usize, outer: usize },
    #[error("table scope mismatch: {0}")]
    ScopeMismatch(&'static str),
    #[error("table is not a probability table (sum = {sum}, min entry = {min})")]
    NotNormalized { sum: f64, min: f64 },
    #[error("support violation: q is zero where p is positive")]
    SupportViolation,
    #[error("pseudomarginals violate local consistency (max residual {max_residual:e})")]
    InvalidPseudomarginals { max_residual: f64 },
    #[error("state space too large: {states} states exceeds cap {cap}")]
    TooLarge { states: u128, cap: u128 },
    #[error("too many regions for exhaustive enumeration: {count} > {cap}")]
    TooManyRegions { count: usize, cap: usize },
    #[error("too many vertices for exhaustive enumeration: {count} > {cap}")]
    TooManyVertices { count: usize, cap: usize },
    #[error("too many factors for enumeration: {count} > {cap}")]
    TooManyFactors { count: usize, cap: usize },
    #[error("Hall condition violated by left set {0:?}")]
    HallConditionViolated(Vec<usize>),
    #[error("point is too close to the boundary of the local polytope (min entry {min_entry:e})")]
    BoundaryPoint { min_entry: f64 },
    #[error("symmetric point is infeasible (min table entry {min_entry:e})")]
    InfeasiblePoint { min_entry: f64 },
    #[error("all vertex domains must be binary")]
    NonBinaryDomain,
    #[error("weight {index} is not positive ({value})")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("weight {index} is not a positive integer ({value})")]
    NonIntegerWeight { index: usize, value: f64 },
    #[error("bad graph family parameter: {0}")]
    BadFamilyParameter(&'static str),
    #[error("invalid region weights: {0}")]
    InvalidWeights(&'static str),
    #[error("non-finite message at iteration {iteration}")]
    NonFiniteMessage { iteration: usize },
    #[error("edge weight {index} is not positive ({value})")]
    NonPositiveEdgeWeight { index: usize, value: f64 },
    #[error("{0} is not a perfect square")]
    NotPerfectSquare(usize),
    #[error("graph too small: {0}")]
    TooSmall(&'static str),
    #[error("invalid graph: {0}")]
    InvalidGraph(&'static str),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
