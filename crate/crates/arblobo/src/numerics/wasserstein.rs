//! Exact 1-D Wasserstein-1 distance between empirical measures with equal
//! sample counts: the mean absolute difference of order statistics.

use crate::Scalar;

use super::{NumericsError, Result};

/// W₁ distance between the empirical measures of two sorted samples of equal
/// size: `(1/n) Σ |a₍ᵢ₎ − b₍ᵢ₎|`.
pub fn empirical_w1_1d<T: Scalar>(samples_a: &[T], samples_b: &[T]) -> Result<T> {
    if samples_a.is_empty() {
        return Err(NumericsError::EmptyInput);
    }
    if samples_a.len() != samples_b.len() {
        return Err(NumericsError::DimensionMismatch {
            expected: samples_a.len(),
            got: samples_b.len(),
        });
    }
    debug_assert!(samples_a.windows(2).all(|w| w[0] <= w[1]), "samples_a must be sorted");
    debug_assert!(samples_b.windows(2).all(|w| w[0] <= w[1]), "samples_b must be sorted");
    let sum = samples_a
        .iter()
        .zip(samples_b)
        .fold(T::zero(), |acc, (&a, &b)| acc + (a - b).abs());
    Ok(sum / T::count(samples_a.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_samples_have_zero_distance() {
        let xs = [0.0, 1.0, 2.5];
        assert_eq!(empirical_w1_1d(&xs, &xs).unwrap(), 0.0);
    }

    #[test]
    fn point_masses() {
        assert_eq!(empirical_w1_1d(&[0.0], &[1.0]).unwrap(), 1.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            empirical_w1_1d::<f64>(&[], &[]),
            Err(NumericsError::EmptyInput)
        ));
        assert!(matches!(
            empirical_w1_1d(&[0.0], &[0.0, 1.0]),
            Err(NumericsError::DimensionMismatch { .. })
        ));
    }

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    proptest! {
        #[test]
        fn metric_properties(
            a in prop::collection::vec(-50.0f64..50.0, 6),
            b in prop::collection::vec(-50.0f64..50.0, 6),
            c in prop::collection::vec(-50.0f64..50.0, 6),
        ) {
            let (a, b, c) = (sorted(a), sorted(b), sorted(c));
            let dab = empirical_w1_1d(&a, &b).unwrap();
            let dba = empirical_w1_1d(&b, &a).unwrap();
            let dac = empirical_w1_1d(&a, &c).unwrap();
            let dcb = empirical_w1_1d(&c, &b).unwrap();
            prop_assert!(dab >= 0.0);
            prop_assert!((dab - dba).abs() < 1e-12);
            prop_assert!(dab <= dac + dcb + 1e-9);
        }
    }
}
