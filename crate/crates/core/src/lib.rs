//! Forward-only contrastive learning with neural polarization.
//!
//! Layers are trained locally: each one scores its own latent vector with a
//! *goodness* function, maps the score (or the pair of scores produced by a
//! positive/negative neuron split) to a probability, and descends the binary
//! cross-entropy of that probability against the sample polarity. No gradient
//! ever crosses a layer boundary; the only inter-layer coupling is a
//! goodness-normalized latent handed to the next layer.
//!
//! The crate is organized around that pipeline:
//!
//! * [`functions`] — activations, goodness functions and probability
//!   functions together with their closed-form derivatives.
//! * [`data`] — IDX / CIFAR-10 ingestion, standardization, label-pattern
//!   embedding and positive/negative batch synthesis.
//! * [`model`] — polarized layers, the inter-layer normalization and the
//!   full forward pass.
//! * [`trainer`] — the layer-local BCE loop with Adam.
//! * [`metrics`] — accuracy, convergence area, Hoyer sparsity, neural usage
//!   and the geometric separability index.
//! * [`experiments`] — configuration grids, sweep execution with resume,
//!   and table aggregation.
//!
//! All numeric kernels are generic over the scalar type through [`Real`];
//! `f64` is the default used by the experiment harness (see [`Scalar`]).

pub mod data;
pub mod error;
pub mod experiments;
pub mod functions;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod trainer;

use std::fmt::{Debug, Display};
use std::iter::Sum;

use ndarray::ScalarOperand;
use num_traits::{Float, FromPrimitive, NumAssignOps};

pub use error::{FfaError, Result};
pub use functions::{
    ActivationKind, Aggregation, GoodnessSpec, Inhibition, NormKind, ProbabilitySpec,
};
pub use model::{Network, PolarLayer};

/// Scalar type accepted by every numeric kernel in this crate.
pub trait Real:
    Float
    + FromPrimitive
    + NumAssignOps
    + Sum<Self>
    + ScalarOperand
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Default scalar used by the experiment harness, checkpoints and dumps.
pub type Scalar = f64;

/// Network instantiated at the default scalar.
pub type NetworkF64 = model::Network<f64>;
/// Single-precision network, for memory-constrained runs.
pub type NetworkF32 = model::Network<f32>;

/// Convert an `f64` constant into the working scalar type.
///
/// Panics only if the target type cannot represent any `f64` at all, which
/// does not happen for the float types this crate supports.
#[inline]
pub(crate) fn real<F: Real>(x: f64) -> F {
    F::from_f64(x).expect("constant not representable in scalar type")
}
