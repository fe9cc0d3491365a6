//! Exact rational, polynomial and number-field arithmetic.

pub mod factor;
pub mod field;
pub mod matrix;
pub mod parse;
pub mod poly;
pub mod rational;
pub mod roots;

pub use factor::{verify_factorization, FactorizationReport, Irreducibility};
pub use field::{embeddings, FieldElement, NumberField, DEFAULT_DIGITS};
pub use matrix::QMatrix;
pub use poly::RatPolynomial;
pub use rational::Q;
pub use roots::HpComplex;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArithError {
    #[error("field elements belong to different fields")]
    FieldMismatch,
    #[error("expected {expected} coordinates, got {got}")]
    CoordinateLength { expected: usize, got: usize },
    #[error("basis is degenerate (change-of-basis determinant is zero)")]
    DegenerateBasis,
    #[error("division by zero")]
    DivisionByZero,
    #[error("not a field modulus: {0}")]
    NotAField(String),
    #[error("polynomial {0} has a repeated root")]
    RepeatedRoot(String),
    #[error("factor product mismatch: {0}")]
    ProductMismatch(String),
    #[error("factor {0} has some but not all roots rational; split it further")]
    PartialSplit(String),
    #[error("root refinement did not converge (residual {residual:e})")]
    RootRefinement { residual: f64 },
    #[error("precision must be at least 15 digits, got {0}")]
    Precision(u32),
    #[error("parse error: {0}")]
    Parse(String),
}
