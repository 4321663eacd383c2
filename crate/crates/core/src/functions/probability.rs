//! Probability functions mapping goodness scores to `[0, 1]`.
//!
//! Three kinds are supported. `FfaSigmoid` reads only the positive goodness;
//! the other two compare the positive and negative scores of a polarized
//! layer. Note the opposite roles of `theta` in the two sigmoids: the FFA
//! form reaches ½ at `g_pos = theta`, while the polar form reaches ½ at
//! `g_pos − g_neg = −theta`. Both are implemented exactly in those forms.

use serde::{Deserialize, Serialize};

use super::sigmoid;
use crate::error::{FfaError, Result};
use crate::{real, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbabilitySpec {
    /// `P = σ(α · (g_pos − θ))`; ignores `g_neg`.
    FfaSigmoid { theta: f64, alpha: f64 },
    /// `P = σ(α · (g_pos − g_neg + θ))`.
    PolarSigmoid { theta: f64, alpha: f64 },
    /// `P = (g_pos + ε) / (g_pos + g_neg + 2ε)`; total for all non-negative
    /// inputs and exactly symmetric: `P(a, b) + P(b, a) = 1`.
    Symmetric { epsilon: f64 },
}

impl ProbabilitySpec {
    pub const DEFAULT_THETA: f64 = 2.0;
    pub const DEFAULT_ALPHA: f64 = 1.0;
    pub const DEFAULT_EPSILON: f64 = 1e-6;

    pub fn ffa_sigmoid_default() -> Self {
        ProbabilitySpec::FfaSigmoid {
            theta: Self::DEFAULT_THETA,
            alpha: Self::DEFAULT_ALPHA,
        }
    }

    pub fn polar_sigmoid_default() -> Self {
        ProbabilitySpec::PolarSigmoid {
            theta: Self::DEFAULT_THETA,
            alpha: Self::DEFAULT_ALPHA,
        }
    }

    pub fn symmetric_default() -> Self {
        ProbabilitySpec::Symmetric {
            epsilon: Self::DEFAULT_EPSILON,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ProbabilitySpec::FfaSigmoid { .. } => "ffa_sigmoid",
            ProbabilitySpec::PolarSigmoid { .. } => "polar_sigmoid",
            ProbabilitySpec::Symmetric { .. } => "symmetric",
        }
    }

    /// Whether this probability compares a positive and a negative goodness
    /// score (and therefore requires a polarized layer).
    pub fn uses_negative_goodness(&self) -> bool {
        !matches!(self, ProbabilitySpec::FfaSigmoid { .. })
    }

    pub fn theta(&self) -> Option<f64> {
        match self {
            ProbabilitySpec::FfaSigmoid { theta, .. }
            | ProbabilitySpec::PolarSigmoid { theta, .. } => Some(*theta),
            ProbabilitySpec::Symmetric { .. } => None,
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            ProbabilitySpec::FfaSigmoid { alpha, .. }
            | ProbabilitySpec::PolarSigmoid { alpha, .. } => Some(*alpha),
            ProbabilitySpec::Symmetric { .. } => None,
        }
    }

    pub fn epsilon(&self) -> Option<f64> {
        match self {
            ProbabilitySpec::Symmetric { epsilon } => Some(*epsilon),
            _ => None,
        }
    }
}

/// Probability that the sample producing `(g_pos, g_neg)` is positive.
///
/// Inputs must be finite and non-negative; `FfaSigmoid` ignores `g_neg`.
#[inline]
pub fn probability<F: Real>(spec: &ProbabilitySpec, g_pos: F, g_neg: F) -> F {
    debug_assert!(g_pos.is_finite() && g_pos >= F::zero());
    debug_assert!(g_neg.is_finite() && g_neg >= F::zero());
    match *spec {
        ProbabilitySpec::FfaSigmoid { theta, alpha } => {
            sigmoid(real::<F>(alpha) * (g_pos - real::<F>(theta)))
        }
        ProbabilitySpec::PolarSigmoid { theta, alpha } => {
            sigmoid(real::<F>(alpha) * (g_pos - g_neg + real::<F>(theta)))
        }
        ProbabilitySpec::Symmetric { epsilon } => {
            let eps = real::<F>(epsilon);
            let two_eps = real::<F>(2.0 * epsilon);
            (g_pos + eps) / (g_pos + g_neg + two_eps)
        }
    }
}

/// Exact partial derivatives `(∂P/∂g_pos, ∂P/∂g_neg)`.
#[inline]
pub fn probability_partials<F: Real>(spec: &ProbabilitySpec, g_pos: F, g_neg: F) -> (F, F) {
    match *spec {
        ProbabilitySpec::FfaSigmoid { .. } => {
            let p = probability(spec, g_pos, g_neg);
            let alpha = real::<F>(spec.alpha().unwrap());
            (alpha * p * (F::one() - p), F::zero())
        }
        ProbabilitySpec::PolarSigmoid { .. } => {
            let p = probability(spec, g_pos, g_neg);
            let alpha = real::<F>(spec.alpha().unwrap());
            let d = alpha * p * (F::one() - p);
            (d, -d)
        }
        ProbabilitySpec::Symmetric { epsilon } => {
            let eps = real::<F>(epsilon);
            let two_eps = real::<F>(2.0 * epsilon);
            let den = g_pos + g_neg + two_eps;
            let den2 = den * den;
            ((g_neg + eps) / den2, -(g_pos + eps) / den2)
        }
    }
}

impl std::fmt::Display for ProbabilitySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProbabilitySpec::FfaSigmoid { theta, alpha } => {
                write!(f, "ffa_sigmoid:theta={theta}:alpha={alpha}")
            }
            ProbabilitySpec::PolarSigmoid { theta, alpha } => {
                write!(f, "polar_sigmoid:theta={theta}:alpha={alpha}")
            }
            ProbabilitySpec::Symmetric { epsilon } => write!(f, "symmetric:eps={epsilon}"),
        }
    }
}

impl std::str::FromStr for ProbabilitySpec {
    type Err = FfaError;

    /// Parse the compact config form, e.g. `polar_sigmoid:theta=2:alpha=1`
    /// or `symmetric:eps=1e-6`. Omitted parameters take the defaults
    /// (θ = 2, α = 1, ε = 1e-6).
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let kind = parts.next().unwrap_or_default().to_ascii_lowercase();
        let mut theta = Self::DEFAULT_THETA;
        let mut alpha = Self::DEFAULT_ALPHA;
        let mut epsilon = Self::DEFAULT_EPSILON;
        for part in parts {
            let (key, value) = part.split_once('=').ok_or_else(|| {
                FfaError::Parse(format!("probability parameter '{part}' must be key=value"))
            })?;
            let value: f64 = value
                .parse()
                .map_err(|_| FfaError::Parse(format!("invalid number '{value}' in '{s}'")))?;
            match key.to_ascii_lowercase().as_str() {
                "theta" => theta = value,
                "alpha" => alpha = value,
                "eps" | "epsilon" => epsilon = value,
                other => {
                    return Err(FfaError::Parse(format!(
                        "unknown probability parameter '{other}' in '{s}'"
                    )))
                }
            }
        }
        match kind.as_str() {
            "ffa_sigmoid" => Ok(ProbabilitySpec::FfaSigmoid { theta, alpha }),
            "polar_sigmoid" => Ok(ProbabilitySpec::PolarSigmoid { theta, alpha }),
            "symmetric" => {
                if epsilon <= 0.0 {
                    return Err(FfaError::Parse(format!(
                        "symmetric probability requires eps > 0, got {epsilon}"
                    )));
                }
                Ok(ProbabilitySpec::Symmetric { epsilon })
            }
            other => Err(FfaError::Parse(format!(
                "unknown probability kind '{other}' (expected ffa_sigmoid, polar_sigmoid or symmetric)"
            ))),
        }
    }
}

impl Serialize for ProbabilitySpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ProbabilitySpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ffa_sigmoid_is_half_at_theta() {
        let spec = ProbabilitySpec::FfaSigmoid {
            theta: 2.0,
            alpha: 1.0,
        };
        assert_eq!(probability(&spec, 2.0, 0.0), 0.5);
    }

    #[test]
    fn polar_sigmoid_is_half_at_equal_goodness_when_unshifted() {
        let spec = ProbabilitySpec::PolarSigmoid {
            theta: 0.0,
            alpha: 1.0,
        };
        assert_eq!(probability(&spec, 3.0, 3.0), 0.5);
    }

    #[test]
    fn theta_shifts_the_two_sigmoids_in_opposite_directions() {
        // With θ = 2 the FFA form needs g = 2 to reach ½; the polar form
        // needs g_pos − g_neg = −2. Both behaviors are intentional.
        let ffa = ProbabilitySpec::FfaSigmoid {
            theta: 2.0,
            alpha: 1.0,
        };
        let polar = ProbabilitySpec::PolarSigmoid {
            theta: 2.0,
            alpha: 1.0,
        };
        assert_eq!(probability(&ffa, 2.0, 0.0), 0.5);
        assert_eq!(probability(&polar, 0.0, 2.0), 0.5);
        assert!(probability(&polar, 2.0, 2.0) > 0.5);
    }

    #[test]
    fn symmetric_direct_evaluation() {
        let spec = ProbabilitySpec::Symmetric { epsilon: 1e-6 };
        let expected = (1.0 + 1e-6) / (1.0 + 2e-6);
        assert_eq!(probability(&spec, 1.0, 0.0), expected);
    }

    #[test]
    fn symmetric_sums_to_one() {
        let spec = ProbabilitySpec::Symmetric { epsilon: 1e-6 };
        for (a, b) in [(0.0f64, 0.0), (1.0, 0.0), (3.5, 0.25), (1e4, 2.0)] {
            let sum = probability(&spec, a, b) + probability(&spec, b, a);
            assert!((sum - 1.0).abs() < 1e-15, "a={a} b={b} sum={sum}");
        }
    }

    #[test]
    fn polar_partials_are_antisymmetric() {
        let spec = ProbabilitySpec::PolarSigmoid {
            theta: 0.0,
            alpha: 1.0,
        };
        let (dp, dn) = probability_partials(&spec, 1.0, 1.0);
        assert_eq!(dp, 0.25);
        assert_eq!(dn, -0.25);
    }

    #[test]
    fn ffa_partial_wrt_negative_is_zero() {
        let spec = ProbabilitySpec::FfaSigmoid {
            theta: 2.0,
            alpha: 1.0,
        };
        let (dp, dn) = probability_partials(&spec, 2.0, 7.0);
        assert_eq!(dp, 0.25);
        assert_eq!(dn, 0.0);
    }

    #[test]
    fn symmetric_partials_match_finite_differences() {
        let spec = ProbabilitySpec::Symmetric { epsilon: 1e-6 };
        let (a, b) = (1.0f64, 1.0);
        let (dp, dn) = probability_partials(&spec, a, b);
        let h = 1e-7;
        let fd_p = (probability(&spec, a + h, b) - probability(&spec, a - h, b)) / (2.0 * h);
        let fd_n = (probability(&spec, a, b + h) - probability(&spec, a, b - h)) / (2.0 * h);
        assert!(((dp - fd_p) / fd_p).abs() < 1e-6);
        assert!(((dn - fd_n) / fd_n).abs() < 1e-6);
    }

    #[test]
    fn alpha_scales_sigmoid_slope() {
        let spec = ProbabilitySpec::FfaSigmoid {
            theta: 0.2,
            alpha: 5.0,
        };
        let (dp, _) = probability_partials(&spec, 0.2, 0.0);
        assert_eq!(dp, 5.0 * 0.25);
    }

    #[test]
    fn outputs_stay_in_unit_interval() {
        let specs = [
            ProbabilitySpec::FfaSigmoid {
                theta: 2.0,
                alpha: 1.0,
            },
            ProbabilitySpec::PolarSigmoid {
                theta: 2.0,
                alpha: 1.0,
            },
            ProbabilitySpec::Symmetric { epsilon: 1e-6 },
        ];
        for spec in &specs {
            for &(a, b) in &[(0.0, 0.0), (1e6, 0.0), (0.0, 1e6), (123.0, 456.0)] {
                let p = probability(spec, a, b);
                assert!((0.0..=1.0).contains(&p), "{spec} at ({a},{b}) gave {p}");
            }
        }
    }

    #[test]
    fn config_string_round_trips() {
        for s in [
            "ffa_sigmoid:theta=0.2:alpha=5",
            "polar_sigmoid:theta=2:alpha=1",
            "symmetric:eps=0.000001",
        ] {
            let parsed: ProbabilitySpec = s.parse().unwrap();
            assert_eq!(parsed.to_string(), s);
        }
        let defaulted: ProbabilitySpec = "polar_sigmoid".parse().unwrap();
        assert_eq!(defaulted, ProbabilitySpec::polar_sigmoid_default());
        assert!("gaussian:mu=0".parse::<ProbabilitySpec>().is_err());
        assert!("symmetric:eps=0".parse::<ProbabilitySpec>().is_err());
    }
}
