use crate::error::{Error, Result};
use crate::estimators::GradientBatch;
use crate::scalar::{real, Float};

/// Confidence radius from the vector Bernstein inequality.
///
/// Returns the positive root `ε` of `N·ε²/2 = t·(σ̄² + R·ε/3)` with
/// `t = ln((d+1)/δ)`, i.e. the `ε` at which the tail bound
/// `(d+1)·exp(−(N·ε²/2)/(σ̄² + R·ε/3))` equals `δ`.
pub fn bernstein_epsilon<T: Float>(second_moment: T, r: T, n: usize, d: usize, delta: T) -> Result<T> {
    if !(delta > T::zero() && delta < T::one()) {
        return Err(Error::Domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(second_moment >= T::zero()) || !(r >= T::zero()) {
        return Err(Error::Domain("second moment and R must be nonnegative".into()));
    }
    if n == 0 {
        return Err(Error::Domain("Bernstein radius needs N >= 1".into()));
    }
    let t = (T::from_usize(d + 1).unwrap() / delta).ln();
    let nf = T::from_usize(n).unwrap();
    let a = t * r / real::<T>(3.0);
    Ok((a + (a * a + real::<T>(2.0) * nf * t * second_moment).sqrt()) / nf)
}

/// `(d+1)·exp(−(N·ε²/2)/(σ̄² + R·ε/3))`.
pub fn bernstein_tail<T: Float>(epsilon: T, second_moment: T, r: T, n: usize, d: usize) -> T {
    let nf = T::from_usize(n).unwrap();
    let half = real::<T>(0.5);
    let third = T::one() / real::<T>(3.0);
    T::from_usize(d + 1).unwrap()
        * (-(nf * epsilon * epsilon * half) / (second_moment + r * epsilon * third)).exp()
}

/// `Σ_i ‖g_i‖²`, the plug-in second moment used in the Bernstein radius.
pub fn empirical_second_moment<T: Float>(batch: &GradientBatch<T>) -> T {
    batch.per_sample.iter().fold(T::zero(), |acc, g| {
        acc + g.iter().fold(T::zero(), |a, &x| a + x * x)
    })
}

/// `max_i ‖g_i − ḡ‖`, the default guess for the deviation bound `R`.
pub fn default_r<T: Float>(batch: &GradientBatch<T>) -> T {
    batch
        .per_sample
        .iter()
        .map(|g| crate::scalar::distance(g, &batch.mean))
        .fold(T::zero(), T::max)
}
