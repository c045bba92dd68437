use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("axiom {axiom} violated at {witness:?}")]
    AxiomViolation { axiom: String, witness: Vec<usize> },
    #[error("right translation by {column} is not a bijection")]
    NonBijectiveTranslation { column: usize },
    #[error("kind mismatch: expected {expected}, found {found}")]
    KindMismatch { expected: String, found: String },
    #[error("invalid table: {0}")]
    InvalidTable(String),
    #[error("size {n} exceeds the budget of {budget_seconds} s")]
    SizeTooLarge { n: usize, budget_seconds: u64 },
    #[error("arc {0} has no source or no sink")]
    DanglingArc(String),
    #[error("arc {0} occurs in two source slots")]
    DoubleSource(String),
    #[error("arc {0} occurs in two sink slots")]
    DoubleSink(String),
    #[error("unknown arc {0}")]
    UnknownArc(String),
    #[error("vertex of kind {0} is neither zip nor unzip")]
    SinkVertexPresent(String),
    #[error("unknown name {0}")]
    UnknownName(String),
    #[error("unknown move {0}")]
    UnknownMove(String),
    #[error("site mismatch: {0}")]
    SiteMismatch(String),
    #[error("invalid direction: {0}")]
    InvalidDirection(String),
    #[error("vertex {vertex} has valency {valency}, expected 3")]
    NonTrivalent { vertex: usize, valency: usize },
    #[error("mode mismatch: {0}")]
    ModeMismatch(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("inconsistent lattice: {0}")]
    InconsistentLattice(String),
    #[error("not a cocycle: {0}")]
    NotACocycle(String),
    #[error("term {0} is not reduced")]
    NotReduced(String),
    #[error("position {pos} out of range for a product of {len} factors")]
    PositionOutOfRange { pos: usize, len: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("overflow: {0}")]
    Overflow(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::AxiomViolation { .. } => "AxiomViolation",
            Error::NonBijectiveTranslation { .. } => "NonBijectiveTranslation",
            Error::KindMismatch { .. } => "KindMismatch",
            Error::InvalidTable(_) => "InvalidTable",
            Error::SizeTooLarge { .. } => "SizeTooLarge",
            Error::DanglingArc(_) => "DanglingArc",
            Error::DoubleSource(_) => "DoubleSource",
            Error::DoubleSink(_) => "DoubleSink",
            Error::UnknownArc(_) => "UnknownArc",
            Error::SinkVertexPresent(_) => "SinkVertexPresent",
            Error::UnknownName(_) => "UnknownName",
            Error::UnknownMove(_) => "UnknownMove",
            Error::SiteMismatch(_) => "SiteMismatch",
            Error::InvalidDirection(_) => "InvalidDirection",
            Error::NonTrivalent { .. } => "NonTrivalent",
            Error::ModeMismatch(_) => "ModeMismatch",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::InconsistentLattice(_) => "InconsistentLattice",
            Error::NotACocycle(_) => "NotACocycle",
            Error::NotReduced(_) => "NotReduced",
            Error::PositionOutOfRange { .. } => "PositionOutOfRange",
            Error::Parse(_) => "Parse",
            Error::Overflow(_) => "Overflow",
        }
    }

    /// Internal failures (as opposed to rejected input).
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::InconsistentLattice(_) | Error::Overflow(_))
    }
}
