//! Geometry kernel and pipeline for building PL Morse sweep-outs with
//! certified level-set volume bounds on piecewise-flat simplicial 2- and
//! 3-complexes.
//!
//! The pipeline decomposes a complex into quasi-convex cells, splits it
//! recursively along small chains in the cell skeleton, sweeps single cells
//! by parallel hyperplanes and merges the sub-sweeps across the splitting
//! chains. Every constructed object carries a machine-checkable certificate
//! pairing the achieved value with the dimensional bound it must satisfy.

pub mod cells;
pub mod certificate;
pub mod complex;
pub mod constants;
pub mod generators;
pub mod geom;
pub mod splitter;
pub mod sweep;

pub use cells::CellStructure;
pub use certificate::Certificate;
pub use complex::{Chain, FlatComplex, PlMorse, WidthProfile};
pub use constants::ConstantTable;

/// Relative tolerance used whenever an achieved quantity is compared
/// against one of the dimensional bounds. Recorded in every certificate.
pub const CERT_REL_TOL: f64 = 1e-6;

/// A level t is regular if it differs from every vertex value by more than
/// this factor times the value range; irregular requests are nudged.
pub const REGULAR_FACTOR: f64 = 1e-12;

/// Magnitude factor (times the value range) of the index-ordered offsets
/// used to make vertex values pairwise distinct.
pub const PERTURB_FACTOR: f64 = 1e-12;

/// Per-simplex realizations must reproduce the input edge lengths to this
/// relative tolerance, otherwise the simplex is rejected as degenerate.
pub const REALIZE_REL_TOL: f64 = 1e-9;

/// Relative margin for the combinatorial comparisons (greedy selections,
/// nearest-center assignment): quantities this close count as tied and
/// the deterministic index rule wins. Keeps the constructed combinatorics
/// invariant under uniform rescaling of all edge lengths.
pub const REL_TIE: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("simplex {simplex} has no nondegenerate flat realization")]
    DegenerateSimplex { simplex: usize },
    #[error("face {face:?} is shared by {count} top simplices")]
    NonManifold { face: Vec<usize>, count: usize },
    #[error("complex is disconnected: {unreachable} vertices unreachable")]
    DisconnectedComplex { unreachable: usize },
    #[error("dimension {dim} unsupported (expected {min}..={max})")]
    UnsupportedDimension { dim: usize, min: usize, max: usize },
    #[error("rho {rho} too large: {centers} center(s) on a complex with {tops} simplices")]
    RhoTooLarge { rho: f64, centers: usize, tops: usize },
    #[error("rho {rho} too small: more than {cap} centers")]
    RhoTooSmall { rho: f64, cap: usize },
    #[error("no lambda <= {lambda_max} certifies the cell structure (cell {cell} needs {needed})")]
    CertificateFailure { cell: usize, needed: f64, lambda_max: f64 },
    #[error("chain intersects the central ball of cell {cell}")]
    TooCentral { cell: usize },
    #[error("projected chain volume {achieved} exceeds budget {budget} in cell {cell}")]
    ProjectionBudgetExceeded { cell: usize, achieved: f64, budget: f64 },
    #[error("capacitor shortfall: fractions ({frac1}, {frac2}) below {required}")]
    CapacitorShortfall { frac1: f64, frac2: f64, required: f64 },
    #[error("empty region")]
    EmptyRegion,
    #[error("coarea budget exceeded: best level volume {achieved} > budget {budget}")]
    CoareaBudgetExceeded { achieved: f64, budget: f64 },
    #[error("balance failure: side volume {achieved} below required {required}")]
    BalanceFailure { achieved: f64, required: f64 },
    #[error("chain budget failure: chain volume {achieved} above budget {budget}")]
    ChainBudgetFailure { achieved: f64, budget: f64 },
    #[error("prescribed boundary does not split the cell boundary into two sides")]
    NonSeparatingBoundary,
    #[error("chain is invalid here: {message}")]
    InvalidChain { message: String },
    #[error("epsilon {epsilon} too large: truncation points collide")]
    EpsilonTooLarge { epsilon: f64 },
    #[error("could not reach pairwise distinct vertex values after {retries} retries")]
    ValueCollision { retries: usize },
    #[error("merged width {achieved} exceeds the merge budget {budget}")]
    MergeBudgetFailure { achieved: f64, budget: f64 },
    #[error("single-cell sweep width {achieved} exceeds budget {budget}")]
    SingleCellBudgetExceeded { achieved: f64, budget: f64 },
    #[error("certified width {achieved} exceeds global budget {budget}")]
    GlobalBudgetExceeded { achieved: f64, budget: f64 },
    #[error("bad generator parameters: {message}")]
    BadParams { message: String },
    #[error("width mismatch: certificate says {expected}, recomputed {actual}")]
    WidthMismatch { expected: f64, actual: f64 },
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn with_context(self, context: impl Into<String>) -> Self {
        Error::Context { context: context.into(), source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
