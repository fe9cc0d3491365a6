use thiserror::Error;

use crate::arith::ArithError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("singular anisotropic block for field {0}")]
    SingularBlock(String),
    #[error("invalid Lie parameter: {0}")]
    LieParam(String),
    #[error("imaginary residue {0:e} exceeds tolerance")]
    Reality(f64),
    #[error("empty sampling box")]
    EmptyBox,
    #[error("degenerate matrix: ‖B e_ξ‖ = 0 for ξ = {0:?}")]
    DegenerateB(Vec<usize>),
    #[error("polytope is unbounded along {0:?}")]
    Unbounded(Vec<f64>),
    #[error("polytope is empty")]
    EmptyPolytope,
    #[error("zero denominator volume at index {0}")]
    ZeroVolume(u64),
    #[error("ill-conditioned input (condition number {0:e})")]
    IllConditioned(f64),
    #[error("ambiguous blocks {0:?}: normalize the sequence (left-multiply by a bounded sequence) first")]
    Ambiguous(Vec<(usize, usize)>),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("rank {0} exceeds the limit {1}")]
    RankTooLarge(usize, usize),
    #[error("numerically singular basis")]
    SingularBasis,
    #[error("point count exceeds the guard {0}")]
    CountGuard(u64),
    #[error("non-integral input: {0}")]
    NonIntegral(String),
    #[error("determinant is not 1: {0}")]
    Determinant(String),
    #[error("zero vector")]
    ZeroVector,
    #[error("operation budget exceeded: {0}")]
    Budget(String),
    #[error("insufficient data: {0}")]
    Insufficient(String),
    #[error("weight vector {0:?} stays bounded without being fixed; the sequence is not normalized")]
    Normalization(Vec<usize>),
    #[error("{0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
