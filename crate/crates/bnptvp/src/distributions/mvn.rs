//! Multivariate normal draws in precision (information) form.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::DistributionError;

/// Draw from the Gaussian with covariance `precision^-1` and mean
/// `precision^-1 * mean_term`, via a single Cholesky factorization.
pub fn sample_mvn_from_precision<R: Rng + ?Sized>(
    mean_term: &DVector<f64>,
    precision: &DMatrix<f64>,
    rng: &mut R,
) -> Result<DVector<f64>, DistributionError> {
    let dim = mean_term.len();
    if precision.nrows() != dim || precision.ncols() != dim {
        return Err(DistributionError::DimensionMismatch(format!(
            "mean term has length {dim} but precision is {}x{}",
            precision.nrows(),
            precision.ncols()
        )));
    }
    let chol = Cholesky::new(precision.clone()).ok_or(DistributionError::SingularPrecision)?;
    if chol.l().diagonal().iter().any(|d| !d.is_finite() || *d <= 0.0) {
        return Err(DistributionError::SingularPrecision);
    }
    let mean = chol.solve(mean_term);
    let noise = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    // x = mean + L^-T z has covariance (L L^T)^-1.
    let fluct = chol
        .l()
        .tr_solve_lower_triangular(&noise)
        .ok_or(DistributionError::SingularPrecision)?;
    Ok(mean + fluct)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn identity_precision_is_standard_normal() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let mean_term = DVector::zeros(4);
        let precision = DMatrix::identity(4, 4);
        let n = 200_000;
        let mut sums = DVector::zeros(4);
        let mut cross = DMatrix::zeros(4, 4);
        for _ in 0..n {
            let x = sample_mvn_from_precision(&mean_term, &precision, &mut rng).unwrap();
            sums += &x;
            cross += &x * x.transpose();
        }
        let mean = sums / n as f64;
        let cov = cross / n as f64 - &mean * mean.transpose();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((cov[(i, j)] - expect).abs() < 0.01, "cov[{i}{j}]={}", cov[(i, j)]);
            }
        }
    }

    #[test]
    fn diagonal_precision_mean() {
        // mean_term (2, 0) with precision diag(2, 4) gives mean (1, 0).
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let mean_term = DVector::from_vec(vec![2.0, 0.0]);
        let precision = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 4.0]));
        let n = 400_000;
        let mut sums = DVector::zeros(2);
        for _ in 0..n {
            sums += sample_mvn_from_precision(&mean_term, &precision, &mut rng).unwrap();
        }
        let mean = sums / n as f64;
        assert!((mean[0] - 1.0).abs() < 0.005, "mean={mean}");
        assert!(mean[1].abs() < 0.005);
    }

    #[test]
    fn singular_precision_is_rejected() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let mean_term = DVector::zeros(2);
        // Rank-one matrix: zero eigenvalue.
        let precision = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let result = sample_mvn_from_precision(&mean_term, &precision, &mut rng);
        assert!(matches!(result, Err(DistributionError::SingularPrecision)));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let result =
            sample_mvn_from_precision(&DVector::zeros(3), &DMatrix::identity(2, 2), &mut rng);
        assert!(matches!(result, Err(DistributionError::DimensionMismatch(_))));
    }
}
