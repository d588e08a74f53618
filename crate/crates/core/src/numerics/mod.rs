//! Probability samplers and optimization solvers shared by world generation
//! and the recommenders.

mod linalg;
mod nnls;
mod sampling;
mod wmf;

pub use linalg::{cholesky_solve, least_squares};
pub use nnls::nnls;
pub use sampling::{
    beta_prime_params, sample_beta_prime, sample_dirichlet, sample_utility, BetaPrimeParams,
    SimplexVector,
};
pub use wmf::{weighted_mf_train, FactorizationResult, WmfParams};

use crate::Scalar;

/// Cosine of the angle between `x` and `y`. A zero vector has similarity 0
/// with everything.
pub fn cosine_similarity<T: Scalar>(x: &[T], y: &[T]) -> T {
    assert_eq!(x.len(), y.len(), "cosine_similarity: length mismatch");
    let mut dot = T::zero();
    let mut nx = T::zero();
    let mut ny = T::zero();
    for (&a, &b) in x.iter().zip(y) {
        dot += a * b;
        nx += a * a;
        ny += b * b;
    }
    if nx == T::zero() || ny == T::zero() {
        return T::zero();
    }
    dot / (nx.sqrt() * ny.sqrt())
}

pub fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
}
