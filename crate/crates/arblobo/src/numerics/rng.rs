//! Deterministic, splittable random streams.
//!
//! A stream is identified by a `(seed, stream_id)` pair: the same pair always
//! produces the same draw sequence bit-exactly, and distinct stream ids give
//! streams that can be consumed independently (replications, grid points, and
//! Monte Carlo estimates each get their own id, so parallel schedules cannot
//! change results).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::Scalar;

use super::{DenseMatrix, NumericsError, Result};

/// Counter-based random stream keyed by `(seed, stream_id)`.
#[derive(Clone, Debug)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh stream with the same seed and a different stream id, starting
    /// at its beginning regardless of how much this stream has consumed.
    pub fn substream(&self, stream_id: u64) -> Self {
        Self::new(self.seed, stream_id)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.random()
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform<T: Scalar>(&mut self) -> T {
        T::lit(self.rng.random::<f64>())
    }

    /// Uniform draw in `(lo, hi)`.
    pub fn uniform_in<T: Scalar>(&mut self, lo: T, hi: T) -> T {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal draw.
    pub fn standard_normal<T: Scalar>(&mut self) -> T {
        let z: f64 = StandardNormal.sample(&mut self.rng);
        T::lit(z)
    }

    /// Chi-square draw with `dof` degrees of freedom (`dof > 0`).
    pub fn chi_square<T: Scalar>(&mut self, dof: T) -> Result<T> {
        let k = dof.to_f64().unwrap_or(f64::NAN);
        if !(k > 0.0) {
            return Err(NumericsError::InvalidParameter(format!(
                "chi-square degrees of freedom must be positive, got {k}"
            )));
        }
        let dist = ChiSquared::new(k)
            .map_err(|e| NumericsError::InvalidParameter(format!("chi-square: {e}")))?;
        Ok(T::lit(dist.sample(&mut self.rng)))
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        self.rng.random_range(0..n)
    }
}

/// Draws `mean + L z` with `z` i.i.d. standard normal, where `L` is a
/// (lower-triangular) Cholesky factor of the covariance.
pub fn sample_gaussian<T: Scalar>(
    stream: &mut RandomStream,
    mean: &[T],
    scale: &DenseMatrix<T>,
) -> Result<Vec<T>> {
    let d = mean.len();
    if scale.rows() != d || scale.cols() != d {
        return Err(NumericsError::DimensionMismatch { expected: d, got: scale.rows() });
    }
    let z: Vec<T> = (0..d).map(|_| stream.standard_normal()).collect();
    let mut out = mean.to_vec();
    for i in 0..d {
        // Lower-triangular product: only columns 0..=i contribute.
        let mut s = T::zero();
        for j in 0..=i {
            s = s + scale[(i, j)] * z[j];
        }
        out[i] = out[i] + s;
    }
    Ok(out)
}

/// Draws from a multivariate t distribution with `dof` degrees of freedom,
/// location `mean`, and scale factor `L`: `mean + L z / sqrt(w / dof)` with
/// `z` standard normal and `w` chi-square(`dof`).
pub fn sample_student_t<T: Scalar>(
    stream: &mut RandomStream,
    dof: T,
    mean: &[T],
    scale: &DenseMatrix<T>,
) -> Result<Vec<T>> {
    if !(dof > T::zero()) {
        return Err(NumericsError::InvalidParameter(
            "student-t degrees of freedom must be positive".to_string(),
        ));
    }
    let d = mean.len();
    if scale.rows() != d || scale.cols() != d {
        return Err(NumericsError::DimensionMismatch { expected: d, got: scale.rows() });
    }
    let z: Vec<T> = (0..d).map(|_| stream.standard_normal()).collect();
    let w = stream.chi_square(dof)?;
    let factor = (w / dof).sqrt();
    let mut out = mean.to_vec();
    for i in 0..d {
        let mut s = T::zero();
        for j in 0..=i {
            s = s + scale[(i, j)] * z[j];
        }
        out[i] = out[i] + s / factor;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_key_is_bit_exact() {
        let mut a = RandomStream::new(42, 3);
        let mut b = RandomStream::new(42, 3);
        for _ in 0..200 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut a = RandomStream::new(42, 3);
        let mut b = RandomStream::new(42, 3);
        for _ in 0..200 {
            assert_eq!(a.standard_normal::<f64>().to_bits(), b.standard_normal::<f64>().to_bits());
        }
    }

    #[test]
    fn distinct_streams_differ() {
        let mut a = RandomStream::new(42, 0);
        let mut b = RandomStream::new(42, 1);
        let same = (0..64).filter(|_| a.next_u64() == b.next_u64()).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn gaussian_zero_scale_returns_mean() {
        let mut stream = RandomStream::new(1, 0);
        let mean = vec![1.5, -2.0];
        let x = sample_gaussian(&mut stream, &mean, &DenseMatrix::zeros(2, 2)).unwrap();
        assert_eq!(x, mean);
    }

    #[test]
    fn gaussian_dimension_mismatch() {
        let mut stream = RandomStream::new(1, 0);
        let r = sample_gaussian(&mut stream, &[0.0f64], &DenseMatrix::zeros(2, 2));
        assert!(matches!(r, Err(NumericsError::DimensionMismatch { .. })));
    }

    #[test]
    fn gaussian_moments_match() {
        // d = 2 with a correlated factor: L = [[1, 0], [0.5, 1.2]].
        let mut l = DenseMatrix::<f64>::zeros(2, 2);
        l[(0, 0)] = 1.0;
        l[(1, 0)] = 0.5;
        l[(1, 1)] = 1.2;
        let cov = l.matmul(&l.transpose());
        let mean = vec![0.3, -0.7];
        let n = 100_000;
        let mut stream = RandomStream::new(9, 5);
        let mut sums = [0.0f64; 2];
        let mut prods = [[0.0f64; 2]; 2];
        for _ in 0..n {
            let x = sample_gaussian(&mut stream, &mean, &l).unwrap();
            for i in 0..2 {
                sums[i] += x[i];
                for j in 0..2 {
                    prods[i][j] += (x[i] - mean[i]) * (x[j] - mean[j]);
                }
            }
        }
        let nf = n as f64;
        for i in 0..2 {
            let sigma = cov[(i, i)].sqrt();
            assert!((sums[i] / nf - mean[i]).abs() < 4.0 * sigma / nf.sqrt());
            for j in 0..2 {
                assert!((prods[i][j] / nf - cov[(i, j)]).abs() < 0.05 * cov.max_abs());
            }
        }
    }

    #[test]
    fn student_t_limits() {
        let l = DenseMatrix::<f64>::identity(1);
        // Huge dof: variance within 5% of the Gaussian case (= 1).
        let mut stream = RandomStream::new(4, 0);
        let n = 100_000;
        let mut ss = 0.0f64;
        for _ in 0..n {
            let x = sample_student_t(&mut stream, 1e6, &[0.0], &l).unwrap();
            ss += x[0] * x[0];
        }
        assert!((ss / n as f64 - 1.0).abs() < 0.05);

        // dof = 1 (Cauchy): the empirical median stays near the location.
        let mut stream = RandomStream::new(4, 1);
        let mut draws: Vec<f64> =
            (0..n).map(|_| sample_student_t(&mut stream, 1.0, &[0.0], &l).unwrap()[0]).collect();
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(draws[n / 2].abs() < 0.05);
    }

    #[test]
    fn student_t_draws_are_deterministic() {
        let l = DenseMatrix::<f64>::identity(2);
        let mut a = RandomStream::new(13, 2);
        let mut b = RandomStream::new(13, 2);
        for _ in 0..50 {
            let xa = sample_student_t(&mut a, 4.0, &[1.0, -1.0], &l).unwrap();
            let xb = sample_student_t(&mut b, 4.0, &[1.0, -1.0], &l).unwrap();
            assert_eq!(xa, xb);
        }
    }

    #[test]
    fn student_t_rejects_bad_dof() {
        let mut stream = RandomStream::new(1, 0);
        let l = DenseMatrix::<f64>::identity(1);
        assert!(sample_student_t(&mut stream, 0.0, &[0.0], &l).is_err());
        assert!(sample_student_t(&mut stream, -1.0, &[0.0], &l).is_err());
    }
}
