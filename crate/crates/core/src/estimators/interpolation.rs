use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::bernstein::{bernstein_epsilon, default_r, empirical_second_moment};
use crate::estimators::{EstimatorKind, GradientBatch};
use crate::scalar::{distance, Float};

/// Outcome of choosing the interpolation weight, with every input recorded.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaDecision<T> {
    pub alpha: T,
    pub epsilon: T,
    /// `B = ‖ḡ¹ − ḡ⁰‖`.
    pub gap: T,
    pub feasible: bool,
    pub sig0sq: T,
    pub sig1sq: T,
    pub gamma: T,
    pub delta: T,
    pub r: T,
    pub n: usize,
    pub d: usize,
}

/// Closed-form solution of
/// `min_α α²σ̂₁² + (1−α)²σ̂₀²  s.t.  ε + α·B ≤ γ,  α ∈ [0, 1]`.
///
/// The unconstrained minimiser is the inverse-variance weight
/// `α∞ = σ̂₀²/(σ̂₀² + σ̂₁²)`; if it violates the bias budget the constraint is
/// active and `α = (γ − ε)/B`. When `ε > γ` nothing is feasible and the
/// zeroth-order estimate is used alone (`α = 0`, `feasible = false`).
///
/// With both variances zero the objective is flat, and the tie goes to the
/// first-order estimate only as far as the bias budget allows:
/// `α = 1` if `B ≤ γ − ε`, else `(γ − ε)/max(B, 1e-300)`.
pub fn interpolation_alpha<T: Float>(sig0sq: T, sig1sq: T, gap: T, epsilon: T, gamma: T) -> Result<(T, bool)> {
    let inputs = [sig0sq, sig1sq, gap, epsilon, gamma];
    if inputs.iter().any(|&v| !(v >= T::zero()) || !v.is_finite()) {
        return Err(Error::Domain(
            "interpolation inputs must be finite and nonnegative".into(),
        ));
    }
    if epsilon > gamma {
        return Ok((T::zero(), false));
    }
    let slack = gamma - epsilon;
    let total = sig0sq + sig1sq;
    let alpha = if total == T::zero() {
        if gap <= slack {
            T::one()
        } else {
            slack / gap.max(T::from_f64(1e-300).unwrap_or_else(T::min_positive_value))
        }
    } else {
        let unconstrained = sig0sq / total;
        if unconstrained * gap <= slack {
            unconstrained
        } else {
            slack / gap
        }
    };
    Ok((alpha.max(T::zero()).min(T::one()), true))
}

/// Alpha-order batched gradient `α·ḡ¹ + (1−α)·ḡ⁰`.
///
/// `B` is the distance between the two means; the confidence radius comes
/// from [`bernstein_epsilon`] applied to the zeroth-order batch's second
/// moment `Σ_i ‖g⁰_i‖²` with `N` its size, `d` the parameter dimension, and
/// `R` either given or [`default_r`] of the zeroth-order batch.
pub fn aobg<T: Float>(
    first: &GradientBatch<T>,
    zeroth: &GradientBatch<T>,
    gamma: T,
    delta: T,
    r: Option<T>,
) -> Result<(Vec<T>, AlphaDecision<T>)> {
    if first.kind != EstimatorKind::FirstOrder || zeroth.kind != EstimatorKind::ZerothOrder {
        return Err(Error::Config(
            "aobg needs a first-order and a zeroth-order batch, in that order".into(),
        ));
    }
    if first.dim() != zeroth.dim() {
        return Err(Error::dimension("batch gradient", zeroth.dim(), first.dim()));
    }
    let d = zeroth.dim();
    let n = zeroth.len();
    let gap = distance(&first.mean, &zeroth.mean);
    let r = r.unwrap_or_else(|| default_r(zeroth));
    let epsilon = bernstein_epsilon(empirical_second_moment(zeroth), r, n, d, delta)?;
    let (alpha, feasible) = interpolation_alpha(zeroth.emp_var, first.emp_var, gap, epsilon, gamma)?;
    let gradient = first
        .mean
        .iter()
        .zip(&zeroth.mean)
        .map(|(&g1, &g0)| alpha * g1 + (T::one() - alpha) * g0)
        .collect();
    Ok((
        gradient,
        AlphaDecision {
            alpha,
            epsilon,
            gap,
            feasible,
            sig0sq: zeroth.emp_var,
            sig1sq: first.emp_var,
            gamma,
            delta,
            r,
            n,
            d,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn batch(kind: EstimatorKind, samples: Vec<Vec<f64>>) -> GradientBatch<f64> {
        let n = samples.len();
        GradientBatch::from_samples(kind, samples, vec![0.0; n], 0).unwrap()
    }

    #[test]
    fn symmetric_weights() {
        assert_eq!(interpolation_alpha(1.0, 1.0, 0.0, 0.0, 1.0).unwrap(), (0.5, true));
    }

    #[test]
    fn active_bias_constraint() {
        assert_eq!(interpolation_alpha(3.0, 1.0, 2.0, 0.0, 1.0).unwrap(), (0.5, true));
    }

    #[test]
    fn infeasible_confidence() {
        assert_eq!(interpolation_alpha(3.0, 1.0, 2.0, 2.0, 1.0).unwrap(), (0.0, false));
    }

    #[test]
    fn degenerate_variances() {
        assert_eq!(interpolation_alpha(0.0, 0.0, 0.5, 0.0, 1.0).unwrap(), (1.0, true));
        assert_eq!(interpolation_alpha(0.0, 0.0, 4.0, 0.0, 1.0).unwrap(), (0.25, true));
        assert!(interpolation_alpha(-1.0, 0.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn equal_means_blend_to_the_same_vector() {
        let first = batch(EstimatorKind::FirstOrder, vec![vec![1.0, 2.0], vec![3.0, 0.0]]);
        let zeroth = batch(EstimatorKind::ZerothOrder, vec![vec![0.0, 0.0], vec![4.0, 2.0]]);
        let (g, dec) = aobg(&first, &zeroth, 1e9, 0.05, None).unwrap();
        assert_eq!(dec.gap, 0.0);
        assert!(dec.feasible);
        for (a, b) in g.iter().zip(&first.mean) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_zeroth_order_samples() {
        let first = batch(EstimatorKind::FirstOrder, vec![vec![2.0], vec![2.0]]);
        let zeroth = batch(EstimatorKind::ZerothOrder, vec![vec![0.0], vec![0.0]]);
        // R = 0 and σ̄₀² = 0 give ε = 0; first mean differs, so B = 2
        let (g, dec) = aobg(&first, &zeroth, 1.0, 0.05, None).unwrap();
        assert_eq!(dec.epsilon, 0.0);
        assert_eq!(dec.alpha, 0.5);
        assert_eq!(g, vec![1.0]);
        let same = batch(EstimatorKind::FirstOrder, vec![vec![0.0], vec![0.0]]);
        let (g, dec) = aobg(&same, &zeroth, 1.0, 0.05, Some(0.0)).unwrap();
        assert_eq!((dec.epsilon, dec.alpha, g), (0.0, 1.0, vec![0.0]));
    }

    #[test]
    fn rejects_mismatched_batches() {
        let first = batch(EstimatorKind::FirstOrder, vec![vec![1.0], vec![1.0]]);
        let zeroth = batch(EstimatorKind::ZerothOrder, vec![vec![1.0, 0.0], vec![1.0, 0.0]]);
        assert!(matches!(aobg(&first, &zeroth, 1.0, 0.05, None), Err(Error::Dimension { .. })));
        assert!(aobg(&zeroth, &first, 1.0, 0.05, None).is_err());
    }

    proptest! {
        #[test]
        fn decision_invariants(
            s0 in 0.0..10.0f64, s1 in 0.0..10.0f64, b in 0.0..10.0f64, eps in 0.0..5.0f64, gamma in 0.0..5.0f64
        ) {
            let (alpha, feasible) = interpolation_alpha(s0, s1, b, eps, gamma).unwrap();
            prop_assert!((0.0..=1.0).contains(&alpha));
            if feasible {
                prop_assert!(eps + alpha * b <= gamma + 1e-12);
            }
            if eps > gamma {
                prop_assert!(!feasible && alpha == 0.0);
            }
        }
    }
}
