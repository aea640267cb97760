use thiserror::Error;

/// Errors raised by graph construction, basis assembly, analysis and synthesis.
#[derive(Debug, Error)]
pub enum Error {
    #[error("edge `{edge}` has non-positive length {length}")]
    NonPositiveLength { edge: String, length: f64 },

    #[error("edge `{edge}` references unknown vertex `{vertex}`")]
    DanglingVertex { edge: String, vertex: String },

    #[error("vertex `{0}` is listed twice")]
    DuplicateVertex(String),

    #[error("edge `{0}` is listed twice")]
    DuplicateEdge(String),

    #[error("unknown edge `{0}`")]
    UnknownEdge(String),

    #[error("vertex `{vertex}`: {reason}")]
    BoundaryCondition { vertex: String, reason: String },

    #[error("invalid basis construction: {0}")]
    Basis(String),

    #[error(
        "eigenvalues {a} (mode {ia}) and {b} (mode {ib}) collide within the merge tolerance"
    )]
    EigenvalueCollision { a: f64, ia: usize, b: f64, ib: usize },

    #[error("expression error in `{input}`: {reason}")]
    Expression { input: String, reason: String },

    #[error("coupling term {term}: mapped coordinate {mapped} exceeds source edge length {length}")]
    CoordinateMap { term: usize, mapped: f64, length: f64 },

    #[error("assembled matrix is not Hermitian: defect {defect:.3e} exceeds {threshold:.1e}")]
    NotHermitian { defect: f64, threshold: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("eigenvalue sequence is not strictly increasing at index {0}")]
    NotIncreasing(usize),

    #[error("no block size M <= {n} satisfies the uniform gap condition for delta = {delta}")]
    NoUniformGap { n: usize, delta: f64 },

    #[error("class {class} has {size} members, more than the block size {limit}")]
    ClassTooLarge { class: usize, size: usize, limit: usize },

    #[error("coupling B[{k},1] vanishes; the moment problem is not solvable")]
    VanishingCoupling { k: usize },

    #[error("moment system is ill-conditioned (condition number {0:.3e})")]
    IllConditioned(f64),

    #[error("target is not special unitary: {0}")]
    NotSpecialUnitary(String),

    #[error("invalid control signal: {0}")]
    Signal(String),

    #[error("time step {dt} is too coarse for signal frequency {omega} (need dt <= {limit})")]
    StepTooCoarse { dt: f64, omega: f64, limit: f64 },

    #[error("Picard iteration failed to contract (ratio {ratio:.3}); subdivide [0, T]")]
    NonContraction { ratio: f64 },

    #[error("boundary identity violated at vertex `{vertex}` for mode {k}: {detail}")]
    BoundaryIdentity { vertex: String, k: usize, detail: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
