//! Pure function algebra: activations, goodness functions, probability
//! functions, and their closed-form derivatives.
//!
//! Everything here is stateless and safe to call from any number of
//! concurrent workers. The trainer composes these pieces through the chain
//! rule; the proposition checkers in the test suite exercise them directly.

mod activation;
mod goodness;
mod probability;

pub use activation::{activation_derivative, apply_activation, ActivationKind};
pub use goodness::{goodness, goodness_gradient, Aggregation, GoodnessSpec, Inhibition, NormKind};
pub use probability::{probability, probability_partials, ProbabilitySpec};

/// Numerically stable logistic function.
#[inline]
pub(crate) fn sigmoid<F: crate::Real>(x: F) -> F {
    if x >= F::zero() {
        let z = (-x).exp();
        F::one() / (F::one() + z)
    } else {
        let z = x.exp();
        z / (F::one() + z)
    }
}
