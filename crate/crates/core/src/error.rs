use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid rational: {0}")]
    Rational(String),
    #[error("unknown theory `{0}`")]
    UnknownTheory(String),
    #[error("malformed lattice table: {0}")]
    Lattice(String),
    #[error("signature error: {0}")]
    Signature(String),
    #[error("structure error: {0}")]
    Structure(String),
    #[error("axiom `{axiom}` cannot be canonicalized: {reason}")]
    Scheme { axiom: String, reason: String },
    #[error("equality witness check failed: {0}")]
    EqWitness(String),
    #[error("enumeration guard exceeded: {size} candidates, limit {limit}")]
    Guard { size: u128, limit: u128 },
    #[error("not a metric: {0}")]
    NotMetric(String),
    #[error("not a model: {0}")]
    NotModel(String),
    #[error("invalid term: {0}")]
    Term(String),
    #[error("invalid algebra: {0}")]
    Algebra(String),
    #[error("invalid variety: {0}")]
    Variety(String),
    #[error("invalid proof: {0}")]
    Proof(String),
    #[error("free algebra did not stabilize at depth {0}")]
    NotStabilized(usize),
    #[error("functoriality violated: {0}")]
    Functoriality(String),
    #[error("monad oracle error: {0}")]
    Oracle(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
