//! Synthetic logistic-regression data.

use crate::numerics::{dot, DenseMatrix, RandomStream};
use crate::targets::{sigmoid, LogisticData};

use super::{ExperimentError, Result, YMechanism};

/// Draws `X` with i.i.d. `Unif(-1, 1)` entries and binary responses from the
/// chosen mechanism. Under [`YMechanism::Logistic`] the default coefficient
/// vector is `(1, …, 1)/√d`; `beta_true` overrides it.
pub fn generate_logistic_data(
    stream: &mut RandomStream,
    n: usize,
    d: usize,
    mechanism: YMechanism,
    beta_true: Option<&[f64]>,
) -> Result<LogisticData<f64>> {
    if d == 0 || n <= d {
        return Err(ExperimentError::Config(format!(
            "data generation needs n > d ≥ 1, got (d = {d}, n = {n})"
        )));
    }
    if let Some(beta) = beta_true {
        if beta.len() != d {
            return Err(ExperimentError::Config(format!(
                "beta_true has length {}, dimension is {d}",
                beta.len()
            )));
        }
    }
    let default_beta: Vec<f64>;
    let beta = match (mechanism, beta_true) {
        (YMechanism::FairCoin, _) => None,
        (YMechanism::Logistic, Some(b)) => Some(b),
        (YMechanism::Logistic, None) => {
            default_beta = vec![(d as f64).sqrt().recip(); d];
            Some(default_beta.as_slice())
        }
    };
    let x = DenseMatrix::from_fn(n, d, |_, _| stream.uniform_in(-1.0, 1.0));
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let p = match beta {
            Some(b) => sigmoid(dot(x.row(i), b)),
            None => 0.5,
        };
        y.push(u8::from(stream.uniform::<f64>() < p));
    }
    Ok(LogisticData::new(x, y)?)
}
