use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Tolerance on `max |m − mᵀ|` accepted by [`sqrtm_psd`].
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Principal square root of a symmetric positive semi-definite matrix.
/// Negative eigenvalues from round-off are clamped to zero.
pub fn sqrtm_psd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} matrix is not square",
            m.nrows(),
            m.ncols()
        )));
    }
    let asym = (m - m.transpose()).amax();
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(asym));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let q = &eig.eigenvectors;
    let s = q * DMatrix::from_diagonal(&roots) * q.transpose();
    Ok((&s + s.transpose()) * 0.5)
}

/// Row mean and divide-by-N covariance.
pub fn gaussian_fit(x: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 embeddings, got {n}"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite embedding".into()));
    }
    let mean = x.row_mean().transpose();
    let mut centered = x.clone();
    for mut row in centered.row_iter_mut() {
        row -= mean.transpose();
    }
    let cov = centered.transpose() * &centered / n as f64;
    Ok((mean, cov))
}

/// Fréchet distance between Gaussian fits of two embedding sets (rows are
/// samples).
pub fn frechet(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    if a.ncols() != b.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "embedding dimensions {} and {} differ",
            a.ncols(),
            b.ncols()
        )));
    }
    let (mu_a, cov_a) = gaussian_fit(a)?;
    let (mu_b, cov_b) = gaussian_fit(b)?;
    let sa = sqrtm_psd(&cov_a)?;
    let mid = &sa * &cov_b * &sa;
    let cross = sqrtm_psd(&((&mid + mid.transpose()) * 0.5))?;
    let d = (mu_a - mu_b).norm_squared() + cov_a.trace() + cov_b.trace() - 2.0 * cross.trace();
    Ok(d.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(v.len(), 1, v)
    }

    #[test]
    fn sqrtm_examples() {
        let i = DMatrix::<f64>::identity(3, 3);
        assert!((sqrtm_psd(&i).unwrap() - &i).amax() < 1e-15);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 9.0]));
        let s = sqrtm_psd(&d).unwrap();
        assert!((s - DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0]))).amax() < 1e-14);
    }

    #[test]
    fn sqrtm_rejects_asymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(matches!(sqrtm_psd(&m), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn one_dimensional_closed_forms() {
        let d = frechet(&col(&[-1.0, 1.0]), &col(&[0.0, 2.0])).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
        let d = frechet(&col(&[-1.0, 1.0]), &col(&[-2.0, 2.0])).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(frechet(&DMatrix::zeros(3, 2), &DMatrix::zeros(3, 3)).is_err());
        assert!(frechet(&DMatrix::zeros(1, 2), &DMatrix::zeros(3, 2)).is_err());
    }
}
