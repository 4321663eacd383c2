//! Goodness functions: norm × aggregation × optional lateral inhibition.
//!
//! A goodness function maps a latent vector to a non-negative fitness score.
//! The inhibition step (winner-takes-all) zeroes every coordinate that is not
//! among the `k` most active before the norm is taken; mean aggregation
//! always divides by the full dimension, so the sum/mean pair of a norm stay
//! related by a constant factor even under inhibition.

use serde::{Deserialize, Serialize};

use crate::error::{FfaError, Result};
use crate::{real, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormKind {
    L1,
    L2,
    L2Squared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Aggregation {
    Sum,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Inhibition {
    None,
    /// Keep only the `k` most active coordinates (by absolute value).
    Wta(usize),
}

/// Full specification of a goodness function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GoodnessSpec {
    pub norm: NormKind,
    pub aggregation: Aggregation,
    pub inhibition: Inhibition,
}

impl GoodnessSpec {
    pub fn new(norm: NormKind, aggregation: Aggregation, inhibition: Inhibition) -> Self {
        GoodnessSpec {
            norm,
            aggregation,
            inhibition,
        }
    }

    /// Whether `G(λℓ) = |λ| G(ℓ)` holds for all real `λ`.
    ///
    /// True for the L1 and L2 norms; the squared L2 norm scales with `λ²`
    /// instead, so it is not absolutely homogeneous.
    pub fn is_absolutely_homogeneous(&self) -> bool {
        self.norm != NormKind::L2Squared
    }

    /// Same spec with inhibition removed.
    pub fn without_inhibition(&self) -> GoodnessSpec {
        GoodnessSpec {
            inhibition: Inhibition::None,
            ..*self
        }
    }

    /// Spec of the divisor used for inter-layer normalization: inhibition is
    /// dropped and the squared L2 norm is replaced by the plain L2 norm so
    /// the divisor is absolutely homogeneous.
    pub fn normalization_divisor_spec(&self) -> GoodnessSpec {
        let norm = match self.norm {
            NormKind::L2Squared => NormKind::L2,
            other => other,
        };
        GoodnessSpec {
            norm,
            aggregation: self.aggregation,
            inhibition: Inhibition::None,
        }
    }
}

fn validate<F: Real>(spec: &GoodnessSpec, latent: &[F]) -> Result<()> {
    if latent.is_empty() {
        return Err(FfaError::EmptyInput("goodness"));
    }
    if let Inhibition::Wta(k) = spec.inhibition {
        if k == 0 {
            return Err(FfaError::InvalidArgument(
                "WTA inhibition requires k >= 1".into(),
            ));
        }
    }
    if let Some(i) = latent.iter().position(|v| !v.is_finite()) {
        return Err(FfaError::NonFiniteInput(format!(
            "latent coordinate {i} is {}",
            latent[i]
        )));
    }
    Ok(())
}

/// Boolean mask of coordinates kept by the inhibition step.
///
/// Selects the `k` largest by absolute value; ties break toward the lowest
/// index so the selection is deterministic.
fn kept_mask<F: Real>(latent: &[F], inhibition: Inhibition) -> Vec<bool> {
    match inhibition {
        Inhibition::None => vec![true; latent.len()],
        Inhibition::Wta(k) if k >= latent.len() => vec![true; latent.len()],
        Inhibition::Wta(k) => {
            let mut order: Vec<usize> = (0..latent.len()).collect();
            order.sort_by(|&a, &b| {
                latent[b]
                    .abs()
                    .partial_cmp(&latent[a].abs())
                    .expect("finite latent")
                    .then(a.cmp(&b))
            });
            let mut mask = vec![false; latent.len()];
            for &i in order.iter().take(k) {
                mask[i] = true;
            }
            mask
        }
    }
}

/// Goodness score `G(ℓ) ≥ 0` of a latent vector.
pub fn goodness<F: Real>(spec: &GoodnessSpec, latent: &[F]) -> Result<F> {
    validate(spec, latent)?;
    let mask = kept_mask(latent, spec.inhibition);
    Ok(goodness_masked(spec, latent, &mask))
}

fn goodness_masked<F: Real>(spec: &GoodnessSpec, latent: &[F], mask: &[bool]) -> F {
    let raw: F = match spec.norm {
        NormKind::L1 => masked_sum(latent, mask, |x| x.abs()),
        NormKind::L2 | NormKind::L2Squared => masked_sum(latent, mask, |x| x * x),
    };
    let n = real::<F>(latent.len() as f64);
    let aggregated = match spec.aggregation {
        Aggregation::Sum => raw,
        Aggregation::Mean => raw / n,
    };
    match spec.norm {
        NormKind::L1 | NormKind::L2Squared => aggregated,
        NormKind::L2 => aggregated.sqrt(),
    }
}

fn masked_sum<F: Real>(latent: &[F], mask: &[bool], f: impl Fn(F) -> F) -> F {
    latent
        .iter()
        .zip(mask)
        .filter(|(_, &kept)| kept)
        .map(|(&x, _)| f(x))
        .sum()
}

/// Exact gradient of [`goodness`] with respect to each latent coordinate.
///
/// Coordinates zeroed by inhibition receive gradient 0. The L1 norm uses
/// `sign(ℓᵢ)` with subgradient 0 at `ℓᵢ = 0`; the L2 norm at the zero vector
/// returns the zero vector.
pub fn goodness_gradient<F: Real>(spec: &GoodnessSpec, latent: &[F]) -> Result<Vec<F>> {
    validate(spec, latent)?;
    let mask = kept_mask(latent, spec.inhibition);
    let n = real::<F>(latent.len() as f64);
    let agg_factor = match spec.aggregation {
        Aggregation::Sum => F::one(),
        Aggregation::Mean => F::one() / n,
    };

    let grad = match spec.norm {
        NormKind::L1 => latent
            .iter()
            .zip(&mask)
            .map(|(&x, &kept)| {
                if kept {
                    sign(x) * agg_factor
                } else {
                    F::zero()
                }
            })
            .collect(),
        NormKind::L2Squared => latent
            .iter()
            .zip(&mask)
            .map(|(&x, &kept)| {
                if kept {
                    real::<F>(2.0) * x * agg_factor
                } else {
                    F::zero()
                }
            })
            .collect(),
        NormKind::L2 => {
            // d/dxᵢ sqrt(agg · Σx²) = agg · xᵢ / G, with G the goodness value.
            let g = goodness_masked(spec, latent, &mask);
            if g == F::zero() {
                vec![F::zero(); latent.len()]
            } else {
                latent
                    .iter()
                    .zip(&mask)
                    .map(|(&x, &kept)| {
                        if kept {
                            x * agg_factor / g
                        } else {
                            F::zero()
                        }
                    })
                    .collect()
            }
        }
    };
    Ok(grad)
}

#[inline]
fn sign<F: Real>(x: F) -> F {
    if x > F::zero() {
        F::one()
    } else if x < F::zero() {
        -F::one()
    } else {
        F::zero()
    }
}

impl NormKind {
    pub fn name(self) -> &'static str {
        match self {
            NormKind::L1 => "l1",
            NormKind::L2 => "l2",
            NormKind::L2Squared => "l2sq",
        }
    }
}

impl Aggregation {
    pub fn name(self) -> &'static str {
        match self {
            Aggregation::Sum => "sum",
            Aggregation::Mean => "mean",
        }
    }
}

impl std::fmt::Display for GoodnessSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.norm.name(), self.aggregation.name())?;
        match self.inhibition {
            Inhibition::None => write!(f, ":none"),
            Inhibition::Wta(k) => write!(f, ":wta{k}"),
        }
    }
}

impl std::str::FromStr for GoodnessSpec {
    type Err = FfaError;

    /// Parse the compact config form, e.g. `l2sq:sum:wta15` or `l1:mean`
    /// (inhibition defaults to `none`).
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() < 2 || parts.len() > 3 {
            return Err(FfaError::Parse(format!(
                "goodness spec '{s}' must be <norm>:<aggregation>[:<inhibition>]"
            )));
        }
        let norm = match parts[0].to_ascii_lowercase().as_str() {
            "l1" => NormKind::L1,
            "l2" => NormKind::L2,
            "l2sq" | "l2squared" => NormKind::L2Squared,
            other => {
                return Err(FfaError::Parse(format!(
                    "unknown norm '{other}' (expected l1, l2 or l2sq)"
                )))
            }
        };
        let aggregation = match parts[1].to_ascii_lowercase().as_str() {
            "sum" => Aggregation::Sum,
            "mean" => Aggregation::Mean,
            other => {
                return Err(FfaError::Parse(format!(
                    "unknown aggregation '{other}' (expected sum or mean)"
                )))
            }
        };
        let inhibition = match parts.get(2).map(|p| p.to_ascii_lowercase()) {
            None => Inhibition::None,
            Some(p) if p == "none" => Inhibition::None,
            Some(p) => {
                let k: usize = p
                    .strip_prefix("wta")
                    .and_then(|rest| rest.parse().ok())
                    .filter(|&k| k >= 1)
                    .ok_or_else(|| {
                        FfaError::Parse(format!(
                            "unknown inhibition '{p}' (expected none or wta<k> with k >= 1)"
                        ))
                    })?;
                Inhibition::Wta(k)
            }
        };
        Ok(GoodnessSpec {
            norm,
            aggregation,
            inhibition,
        })
    }
}

impl Serialize for GoodnessSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for GoodnessSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(norm: NormKind, agg: Aggregation, inh: Inhibition) -> GoodnessSpec {
        GoodnessSpec::new(norm, agg, inh)
    }

    #[test]
    fn l2sq_sum_is_sum_of_squares() {
        let g = goodness(
            &spec(NormKind::L2Squared, Aggregation::Sum, Inhibition::None),
            &[1.0, 2.0],
        )
        .unwrap();
        assert_eq!(g, 5.0);
    }

    #[test]
    fn l1_mean_divides_by_dimension() {
        let g = goodness(
            &spec(NormKind::L1, Aggregation::Mean, Inhibition::None),
            &[1.0, -1.0],
        )
        .unwrap();
        assert_eq!(g, 1.0);
    }

    #[test]
    fn wta_masks_before_norm() {
        // Brute-force oracle: top-1 of [3, 1, 2] by magnitude keeps index 0.
        let g = goodness(
            &spec(NormKind::L2Squared, Aggregation::Sum, Inhibition::Wta(1)),
            &[3.0, 1.0, 2.0],
        )
        .unwrap();
        assert_eq!(g, 9.0);
    }

    #[test]
    fn wta_with_large_k_is_identity() {
        let s_full = spec(NormKind::L2, Aggregation::Sum, Inhibition::None);
        let s_wta = spec(NormKind::L2, Aggregation::Sum, Inhibition::Wta(10));
        let v = [0.5, -1.5, 2.5];
        assert_eq!(goodness(&s_wta, &v).unwrap(), goodness(&s_full, &v).unwrap());
    }

    #[test]
    fn wta_ties_break_to_lowest_index() {
        // |v| = [2, 2, 1]: top-1 must keep index 0, not 1.
        let g = goodness(
            &spec(NormKind::L1, Aggregation::Sum, Inhibition::Wta(1)),
            &[-2.0, 2.0, 1.0],
        )
        .unwrap();
        assert_eq!(g, 2.0);
        let grad = goodness_gradient(
            &spec(NormKind::L1, Aggregation::Sum, Inhibition::Wta(1)),
            &[-2.0, 2.0, 1.0],
        )
        .unwrap();
        assert_eq!(grad, vec![-1.0, 0.0, 0.0]);
    }

    #[test]
    fn empty_vector_rejected() {
        let err = goodness(
            &spec(NormKind::L1, Aggregation::Sum, Inhibition::None),
            &[] as &[f64],
        )
        .unwrap_err();
        assert!(matches!(err, FfaError::EmptyInput(_)));
    }

    #[test]
    fn wta_k_zero_rejected() {
        let err = goodness(
            &spec(NormKind::L1, Aggregation::Sum, Inhibition::Wta(0)),
            &[1.0],
        )
        .unwrap_err();
        assert!(matches!(err, FfaError::InvalidArgument(_)));
    }

    #[test]
    fn l2sq_gradient_is_two_ell() {
        let grad = goodness_gradient(
            &spec(NormKind::L2Squared, Aggregation::Sum, Inhibition::None),
            &[1.0, 2.0],
        )
        .unwrap();
        assert_eq!(grad, vec![2.0, 4.0]);
    }

    #[test]
    fn l1_gradient_is_sign_with_zero_at_zero() {
        let grad = goodness_gradient(
            &spec(NormKind::L1, Aggregation::Sum, Inhibition::None),
            &[-3.0, 0.0, 5.0],
        )
        .unwrap();
        assert_eq!(grad, vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn l2_gradient_at_zero_vector_is_zero() {
        let grad = goodness_gradient(
            &spec(NormKind::L2, Aggregation::Sum, Inhibition::None),
            &[0.0, 0.0],
        )
        .unwrap();
        assert_eq!(grad, vec![0.0, 0.0]);
    }

    #[test]
    fn l2_mean_gradient_matches_finite_differences() {
        let s = spec(NormKind::L2, Aggregation::Mean, Inhibition::None);
        let point = [3.0f64, 4.0];
        let grad = goodness_gradient(&s, &point).unwrap();
        let h = 1e-6;
        for i in 0..point.len() {
            let mut plus = point;
            let mut minus = point;
            plus[i] += h;
            minus[i] -= h;
            let fd =
                (goodness(&s, &plus).unwrap() - goodness(&s, &minus).unwrap()) / (2.0 * h);
            let rel = ((grad[i] - fd) / fd).abs();
            assert!(rel < 1e-6, "coordinate {i}: analytic {} vs fd {fd}", grad[i]);
        }
    }

    #[test]
    fn homogeneity_flag_matches_norms() {
        assert!(spec(NormKind::L1, Aggregation::Sum, Inhibition::None).is_absolutely_homogeneous());
        assert!(spec(NormKind::L2, Aggregation::Mean, Inhibition::None).is_absolutely_homogeneous());
        assert!(!spec(NormKind::L2Squared, Aggregation::Sum, Inhibition::None)
            .is_absolutely_homogeneous());
    }

    #[test]
    fn divisor_spec_is_homogeneous_and_uninhibited() {
        let s = spec(NormKind::L2Squared, Aggregation::Mean, Inhibition::Wta(5));
        let d = s.normalization_divisor_spec();
        assert_eq!(d.norm, NormKind::L2);
        assert_eq!(d.aggregation, Aggregation::Mean);
        assert_eq!(d.inhibition, Inhibition::None);
        assert!(d.is_absolutely_homogeneous());
    }

    #[test]
    fn config_string_round_trips() {
        for s in ["l2sq:sum:wta15", "l1:mean:none", "l2:sum:none"] {
            let parsed: GoodnessSpec = s.parse().unwrap();
            assert_eq!(parsed.to_string(), s);
        }
        let short: GoodnessSpec = "l1:mean".parse().unwrap();
        assert_eq!(short.inhibition, Inhibition::None);
        assert!("l9:sum".parse::<GoodnessSpec>().is_err());
        assert!("l2:sum:wta0".parse::<GoodnessSpec>().is_err());
    }
}
