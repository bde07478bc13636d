//! Weighted arithmetic sums `I_n(f) = n^(-α) Σ_{k≤n} f(k/n)·a_k` and their
//! limits `L ∫₀¹ α x^(α-1) f(x) dx`.
//!
//! - [`arith`]: sieved tables of φ and σ, with an on-disk cache.
//! - [`expr`]: the expression language used for f and synthetic weights.
//! - [`sums`]: deterministic compensated sums.
//! - [`quad`]: adaptive Gauss–Kronrod quadrature and the limit functional.
//! - [`verify`]: convergence reports against a catalog of known limits.

pub mod arith;
pub mod expr;
pub mod quad;
pub mod sums;
pub mod verify;

use thiserror::Error;

/// Any error from this crate, tagged with the module it came from.
#[derive(Debug, Error)]
pub enum Error {
    #[error("arith: {0}")]
    Arith(#[from] arith::ArithError),
    #[error("expr: {0}")]
    Parse(#[from] expr::ParseError),
    #[error("expr: {0}")]
    Eval(#[from] expr::EvalError),
    #[error("sums: {0}")]
    Sum(#[from] sums::SumError),
    #[error("quad: {0}")]
    Quad(#[from] quad::QuadError),
    #[error("verify: {0}")]
    Verify(verify::VerifyError),
}

impl From<verify::VerifyError> for Error {
    fn from(e: verify::VerifyError) -> Self {
        use verify::VerifyError as V;
        match e {
            V::Sum(e) => Error::Sum(e),
            V::Arith(e) => Error::Arith(e),
            V::Quad(e) => Error::Quad(e),
            V::Eval(e) => Error::Eval(e),
            other => Error::Verify(other),
        }
    }
}

impl Error {
    /// Name of the originating module.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Arith(_) => "arith",
            Error::Parse(_) | Error::Eval(_) => "expr",
            Error::Sum(_) => "sums",
            Error::Quad(_) => "quad",
            Error::Verify(_) => "verify",
        }
    }
}
