use thiserror::Error;

use crate::scalars::ScalarError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("group has an infinite cyclic factor")]
    InfiniteGroup,
    #[error("elements belong to different groups")]
    MismatchedParents,
    #[error("unsupported group: {0}")]
    UnsupportedGroup(String),
    #[error("cochain is not a cocycle")]
    NotACocycle,
    #[error("coefficient module has a nontrivial action")]
    NontrivialAction,
    #[error("map is not a bimodule automorphism: {0}")]
    NotAnAutomorphism(String),
    #[error("objects live over different algebras")]
    MismatchedAlgebra,
    #[error("not a factor system: {0}")]
    NotAFactorSystem(String),
    #[error("linear solve failed: {0}")]
    SolveFailed(String),
    #[error("relations violated at {0:?}")]
    RelationViolated(Vec<String>),
    #[error("system is not free: {0}")]
    NotFree(String),
    #[error("base algebra is not commutative")]
    NotCommutativeBase,
    #[error("flip cocycle is nonzero, total algebra is not commutative")]
    NotCommutative,
    #[error("operation requires a trivial action on the base: {0}")]
    UnsupportedAction(String),
    #[error("bundle realization obstructed: {0}")]
    Obstructed(String),
    #[error("actions do not commute: {0}")]
    ActionsDoNotCommute(String),
    #[error("truncation did not stabilize: {0}")]
    StabilizationFailed(String),
    #[error("computation too large: {0}")]
    TooLarge(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
