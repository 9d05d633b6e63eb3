use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("cone is not strictly convex")]
    NotStrictlyConvex,
    #[error("enumeration budget of {0} lattice points exceeded")]
    BudgetExceeded(u64),
    #[error("morphism is not exact")]
    NotExact,
    #[error("monoid is not saturated: {0}")]
    NotSaturated(String),
    #[error("monoid is not sharp: {0}")]
    NotSharp(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("rank mismatch: {0}")]
    RankMismatch(String),
    #[error("generator {0} does not map into the target monoid")]
    NotAMorphism(usize),
    #[error("infimum of entry ({0},{1}) has no maximum; the Weyl hull is undefined")]
    InfUndefined(usize, usize),
    #[error("restriction data is inconsistent: {0}")]
    IncompatibleChern(String),
    #[error("lattice {0} is given by a singular matrix")]
    SingularLattice(usize),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
