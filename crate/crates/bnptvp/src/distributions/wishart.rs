//! Inverse Wishart sampling via the Bartlett decomposition.

use nalgebra::{Cholesky, DMatrix};
use rand::Rng;
use rand_distr::StandardNormal;

use super::standard::draw_gamma;
use super::DistributionError;

#[derive(Debug, Clone, PartialEq)]
pub struct InverseWishartParams {
    /// Degrees of freedom; must exceed `n - 1`.
    pub dof: f64,
    /// Symmetric positive-definite scale matrix.
    pub scale: DMatrix<f64>,
}

impl InverseWishartParams {
    pub fn new(dof: f64, scale: DMatrix<f64>) -> Result<Self, DistributionError> {
        let n = scale.nrows();
        if scale.ncols() != n || n == 0 {
            return Err(DistributionError::DimensionMismatch(format!(
                "scale must be square, got {}x{}",
                scale.nrows(),
                scale.ncols()
            )));
        }
        let asym = (&scale - scale.transpose()).abs().max();
        if asym > 1e-8 * (1.0 + scale.abs().max()) {
            return Err(DistributionError::NonSpdScale);
        }
        if Cholesky::new(scale.clone()).is_none() {
            return Err(DistributionError::NonSpdScale);
        }
        if !(dof.is_finite() && dof > n as f64 - 1.0) {
            return Err(DistributionError::invalid(
                "inverse_wishart",
                format!("dof {dof} must exceed n - 1 = {}", n - 1),
            ));
        }
        Ok(InverseWishartParams { dof, scale })
    }

    pub fn dim(&self) -> usize {
        self.scale.nrows()
    }
}

/// Draw a symmetric positive-definite matrix from the inverse Wishart.
///
/// `X = W^-1` where `W ~ Wishart(dof, scale^-1)`; for `dof > n + 1` the mean
/// is `scale / (dof - n - 1)`.
pub fn sample_inverse_wishart<R: Rng + ?Sized>(
    params: &InverseWishartParams,
    rng: &mut R,
) -> Result<DMatrix<f64>, DistributionError> {
    let n = params.dim();
    let chol_scale =
        Cholesky::new(params.scale.clone()).ok_or(DistributionError::NonSpdScale)?;
    let scale_inv = chol_scale.inverse();
    let chol_inv = Cholesky::new(scale_inv).ok_or(DistributionError::NonSpdScale)?;

    // Bartlett factor: lower-triangular A with chi draws on the diagonal.
    let mut bartlett = DMatrix::zeros(n, n);
    for i in 0..n {
        let chi_sq = draw_gamma((params.dof - i as f64) / 2.0, 2.0, rng);
        bartlett[(i, i)] = chi_sq.sqrt();
        for j in 0..i {
            bartlett[(i, j)] = rng.sample::<f64, _>(StandardNormal);
        }
    }
    // W = (L A)(L A)^T, so X = W^-1 = M^-T M^-1 with M = L A lower-triangular.
    let m = chol_inv.l() * bartlett;
    let m_inv = m
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .ok_or(DistributionError::NonSpdScale)?;
    let draw = m_inv.transpose() * m_inv;
    Ok(symmetrize(draw))
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn one_dimensional_reduction_to_inverse_gamma() {
        // IW(dof=4, scale=[2]) is inverse gamma(shape 2, scale 1): mean 1.
        let params = InverseWishartParams::new(4.0, DMatrix::from_element(1, 1, 2.0)).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let n = 300_000;
        let mean = (0..n)
            .map(|_| sample_inverse_wishart(&params, &mut rng).unwrap()[(0, 0)])
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean={mean}");
    }

    #[test]
    fn moment_identity_two_dimensional() {
        // IW(6, I_2) has mean I/3 entrywise.
        let params = InverseWishartParams::new(6.0, DMatrix::identity(2, 2)).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let n = 200_000;
        let mut acc = DMatrix::zeros(2, 2);
        for _ in 0..n {
            acc += sample_inverse_wishart(&params, &mut rng).unwrap();
        }
        let mean = acc / n as f64;
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 / 3.0 } else { 0.0 };
                assert!((mean[(i, j)] - expect).abs() < 0.01, "mean={mean}");
            }
        }
    }

    #[test]
    fn draws_are_symmetric_positive_definite() {
        let scale = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.1, 0.5, 1.5, -0.2, 0.1, -0.2, 1.0]);
        let params = InverseWishartParams::new(7.5, scale).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..200 {
            let draw = sample_inverse_wishart(&params, &mut rng).unwrap();
            assert!((&draw - draw.transpose()).abs().max() < 1e-12);
            assert!(Cholesky::new(draw).is_some());
        }
    }

    #[test]
    fn invalid_dof_rejected() {
        // dof must exceed n - 1 = 1.
        let result = InverseWishartParams::new(1.0, DMatrix::identity(2, 2));
        assert!(result.is_err());
    }

    #[test]
    fn non_spd_scale_rejected() {
        let scale = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]); // indefinite
        assert!(matches!(
            InverseWishartParams::new(5.0, scale),
            Err(DistributionError::NonSpdScale)
        ));
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.0, 1.0]);
        assert!(InverseWishartParams::new(5.0, asym).is_err());
    }

    #[test]
    fn dvector_diag_mean_check() {
        // Diagonal scale: each diagonal entry behaves like its own inverse gamma.
        let params = InverseWishartParams::new(
            8.0,
            DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0])),
        )
        .unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let n = 150_000;
        let mut acc = DMatrix::zeros(2, 2);
        for _ in 0..n {
            acc += sample_inverse_wishart(&params, &mut rng).unwrap();
        }
        let mean = acc / n as f64;
        // mean = scale / (dof - n - 1) = scale / 5
        assert!((mean[(0, 0)] - 0.6).abs() < 0.01, "mean={mean}");
        assert!((mean[(1, 1)] - 0.2).abs() < 0.01);
    }
}
