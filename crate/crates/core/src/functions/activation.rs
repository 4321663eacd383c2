//! Elementwise activation functions and their derivatives.

use serde::{Deserialize, Serialize};

use super::sigmoid;
use crate::error::{FfaError, Result};
use crate::Real;

/// Elementwise activation applied to a layer's preactivation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActivationKind {
    ReLU,
    Sigmoid,
    Tanh,
}

impl ActivationKind {
    /// All supported activations, in stable grid order.
    pub const ALL: [ActivationKind; 3] = [
        ActivationKind::ReLU,
        ActivationKind::Sigmoid,
        ActivationKind::Tanh,
    ];

    #[inline]
    pub fn apply_scalar<F: Real>(self, x: F) -> F {
        match self {
            ActivationKind::ReLU => x.max(F::zero()),
            ActivationKind::Sigmoid => sigmoid(x),
            ActivationKind::Tanh => x.tanh(),
        }
    }

    /// Derivative evaluated at the preactivation `x`.
    ///
    /// ReLU uses the subgradient 0 at `x = 0`, consistent with its output
    /// being 0 there.
    #[inline]
    pub fn derivative_scalar<F: Real>(self, x: F) -> F {
        match self {
            ActivationKind::ReLU => {
                if x > F::zero() {
                    F::one()
                } else {
                    F::zero()
                }
            }
            ActivationKind::Sigmoid => {
                let s = sigmoid(x);
                s * (F::one() - s)
            }
            ActivationKind::Tanh => {
                let t = x.tanh();
                F::one() - t * t
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::ReLU => "relu",
            ActivationKind::Sigmoid => "sigmoid",
            ActivationKind::Tanh => "tanh",
        }
    }
}

impl std::str::FromStr for ActivationKind {
    type Err = FfaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "relu" => Ok(ActivationKind::ReLU),
            "sigmoid" => Ok(ActivationKind::Sigmoid),
            "tanh" => Ok(ActivationKind::Tanh),
            other => Err(FfaError::Parse(format!(
                "unknown activation '{other}' (expected relu, sigmoid or tanh)"
            ))),
        }
    }
}

impl std::fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn check_finite<F: Real>(pre: &[F], what: &str) -> Result<()> {
    if let Some(i) = pre.iter().position(|v| !v.is_finite()) {
        return Err(FfaError::NonFiniteInput(format!(
            "{what} coordinate {i} is {}",
            pre[i]
        )));
    }
    Ok(())
}

/// Apply the activation elementwise. Rejects non-finite inputs.
pub fn apply_activation<F: Real>(kind: ActivationKind, pre: &[F]) -> Result<Vec<F>> {
    check_finite(pre, "activation input")?;
    Ok(pre.iter().map(|&x| kind.apply_scalar(x)).collect())
}

/// Elementwise derivative of the activation, evaluated at the preactivation.
pub fn activation_derivative<F: Real>(kind: ActivationKind, pre: &[F]) -> Result<Vec<F>> {
    check_finite(pre, "activation input")?;
    Ok(pre.iter().map(|&x| kind.derivative_scalar(x)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relu_clamps_negatives() {
        assert_eq!(
            apply_activation(ActivationKind::ReLU, &[-1.0, 2.0]).unwrap(),
            vec![0.0, 2.0]
        );
    }

    #[test]
    fn sigmoid_at_zero_is_half() {
        assert_eq!(
            apply_activation(ActivationKind::Sigmoid, &[0.0]).unwrap(),
            vec![0.5]
        );
    }

    #[test]
    fn tanh_is_odd_at_zero() {
        assert_eq!(
            apply_activation(ActivationKind::Tanh, &[0.0]).unwrap(),
            vec![0.0]
        );
    }

    #[test]
    fn derivatives_at_reference_points() {
        assert_eq!(
            activation_derivative(ActivationKind::ReLU, &[2.0]).unwrap(),
            vec![1.0]
        );
        assert_eq!(
            activation_derivative(ActivationKind::Sigmoid, &[0.0]).unwrap(),
            vec![0.25]
        );
        assert_eq!(
            activation_derivative(ActivationKind::Tanh, &[0.0]).unwrap(),
            vec![1.0]
        );
    }

    #[test]
    fn non_finite_input_rejected() {
        let err = apply_activation(ActivationKind::ReLU, &[f64::NAN]).unwrap_err();
        assert!(matches!(err, FfaError::NonFiniteInput(_)));
        let err = activation_derivative(ActivationKind::Tanh, &[f64::INFINITY]).unwrap_err();
        assert!(matches!(err, FfaError::NonFiniteInput(_)));
    }

    #[test]
    fn output_ranges_hold() {
        let xs: Vec<f64> = (-100..100).map(|i| i as f64 / 7.0).collect();
        for &x in &xs {
            assert!(ActivationKind::ReLU.apply_scalar(x) >= 0.0);
            let s = ActivationKind::Sigmoid.apply_scalar(x);
            assert!(s > 0.0 && s < 1.0);
            let t = ActivationKind::Tanh.apply_scalar(x);
            assert!(t > -1.0 && t < 1.0);
        }
    }
}
