use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised across the crate. Each variant carries a stable
/// machine-readable code (see [`Error::code`]) used by the CLI.
#[derive(Debug, Error)]
pub enum Error {
    // mesh construction & queries
    #[error("edge ({0}, {1}) is incident to more than two faces")]
    NonManifoldEdge(usize, usize),
    #[error("faces {face_a} and {face_b} induce the same direction on edge ({i}, {j})")]
    InconsistentOrientation {
        i: usize,
        j: usize,
        face_a: usize,
        face_b: usize,
    },
    #[error("surface is not connected ({components} components)")]
    DisconnectedSurface { components: usize },
    #[error("face {0} is invalid: {1}")]
    InvalidFace(usize, String),
    #[error("vertex {0} is not referenced by any face")]
    UnreferencedVertex(usize),
    #[error("vertex {0} has a non-disk (pinched) star")]
    NonManifoldVertex(usize),
    #[error("mesh has boundary edges but the operation requires a closed surface")]
    NotClosed,
    #[error("no edge joins vertices {0} and {1}")]
    UnknownEdge(usize, usize),

    // file I/O
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("non-triangle face with {count} vertices at line {line}")]
    NonTriangleFace { line: usize, count: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),

    // geometry
    #[error("edge ({0}, {1}) is degenerate (length below floor)")]
    DegenerateEdge(usize, usize),
    #[error("face {0} is degenerate (area below floor)")]
    DegenerateFace(usize),
    #[error("length cross-ratio undefined on boundary edge ({0}, {1})")]
    BoundaryEdge(usize, usize),
    #[error("vertex scaling violates the triangle inequality on face {0}")]
    TriangleInequalityViolated(usize),
    #[error("realization dimension {got} not supported here (need {need})")]
    DimensionMismatch { got: usize, need: usize },
    #[error("field has {got} entries, expected {expected}")]
    SizeMismatch { got: usize, expected: usize },

    // conformal solves
    #[error("deformation is not conformal (max scale-factor residual {residual:.3e})")]
    NotConformal { residual: f64 },
    #[error("face rotation compatibility (left/right expressions) violated: {max:.3e}")]
    Eq2Violated { max: f64 },
    #[error("no deformation realizes the given scale factor (residual {residual:.3e})")]
    Unrealizable {
        residual: f64,
        /// Pairings of the right-hand side against the self-stress
        /// (cokernel) directions; a nonzero entry names the obstruction.
        pairings: Vec<f64>,
    },
    #[error("1-form is not closed (max face sum {max:.3e})")]
    FormNotClosed { max: f64 },
    #[error("1-form is closed but not exact (max period {max:.3e})")]
    FormNotExact { max: f64 },
    #[error("degenerate realization: {0}")]
    DegenerateRealization(String),

    // Dirac pipeline
    #[error("rho must sum to zero on a closed surface (got {sum:.3e})")]
    RhoSumNonzero { sum: f64 },
    #[error("dim Ker D = {dim} > 4; surface admits conformal deformations with vanishing rho")]
    KernelTooLarge { dim: usize, sv_window: Vec<f64> },
    #[error("kernel dimension of D is numerically indeterminate")]
    IndeterminateKernel { sv_window: Vec<f64> },
    #[error("surface has genus {genus}; use the high-genus solve")]
    NotSphere { genus: usize },

    // Möbius maps
    #[error("vertex {0} sits at the singular point of the Möbius map")]
    SingularVertex(usize),
    #[error("vertex {vertex} is not on the unit sphere (|f| = {norm})")]
    NotOnSphere { vertex: usize, norm: f64 },
    #[error("deformation is not isometric (max edge-length rate {residual:.3e})")]
    NotIsometric { residual: f64 },

    // high genus
    #[error("exactness pairing failed; {} of {} pairings nonzero", .values.iter().filter(|v| **v != 0.0).count(), .values.len())]
    PairingFailed { values: Vec<f64> },

    // zoo
    #[error("generator failed: {0}")]
    GenerationFailed(String),
    #[error("unknown zoo spec `{0}`")]
    BadZooSpec(String),
}

impl Error {
    /// Stable machine-readable error code for reports and CLI output.
    pub fn code(&self) -> &'static str {
        use Error::*;
        match self {
            NonManifoldEdge(..) => "NonManifoldEdge",
            InconsistentOrientation { .. } => "InconsistentOrientation",
            DisconnectedSurface { .. } => "DisconnectedSurface",
            InvalidFace(..) => "InvalidFace",
            UnreferencedVertex(..) => "UnreferencedVertex",
            NonManifoldVertex(..) => "NonManifoldVertex",
            NotClosed => "NotClosed",
            UnknownEdge(..) => "UnknownEdge",
            Parse { .. } => "ParseError",
            NonTriangleFace { .. } => "NonTriangleFace",
            Io(..) => "Io",
            DegenerateEdge(..) => "DegenerateEdge",
            DegenerateFace(..) => "DegenerateFace",
            BoundaryEdge(..) => "BoundaryEdge",
            TriangleInequalityViolated(..) => "TriangleInequalityViolated",
            DimensionMismatch { .. } => "DimensionMismatch",
            SizeMismatch { .. } => "SizeMismatch",
            NotConformal { .. } => "NotConformal",
            Eq2Violated { .. } => "Eq2Violated",
            Unrealizable { .. } => "Unrealizable",
            FormNotClosed { .. } => "NotClosed1Form",
            FormNotExact { .. } => "NotExact1Form",
            DegenerateRealization(..) => "DegenerateRealization",
            RhoSumNonzero { .. } => "RhoSumNonzero",
            KernelTooLarge { .. } => "KernelTooLarge",
            IndeterminateKernel { .. } => "IndeterminateKernel",
            NotSphere { .. } => "NotSphere",
            SingularVertex(..) => "SingularVertex",
            NotOnSphere { .. } => "NotOnSphere",
            NotIsometric { .. } => "NotIsometric",
            PairingFailed { .. } => "PairingFailed",
            GenerationFailed(..) => "GenerationFailed",
            BadZooSpec(..) => "BadZooSpec",
        }
    }
}
