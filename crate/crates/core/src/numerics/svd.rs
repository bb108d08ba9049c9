use nalgebra::linalg::SVD;
use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// Iteration cap handed to the bidiagonal QR sweep. Far above what any
/// finite matrix in this crate needs; hitting it means real trouble.
const MAX_SVD_SWEEPS: usize = 100_000;

/// Thin singular value decomposition `M = U · diag(σ) · Vh`.
#[derive(Clone, Debug)]
pub struct SvdResult {
    /// `n1 × r` with orthonormal columns, `r = min(n1, n2)`.
    pub u: ComplexMatrix,
    /// Non-increasing, non-negative.
    pub singular_values: Vec<f64>,
    /// `r × n2` with orthonormal rows.
    pub vh: ComplexMatrix,
}

impl SvdResult {
    /// `U · diag(f(σ)) · Vh`; the building block of singular value thresholding.
    pub fn recompose_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let (n1, r) = self.u.shape();
        let n2 = self.vh.cols();
        let shrunk: Vec<f64> = self.singular_values.iter().map(|&s| f(s)).collect();
        let mut out = ComplexMatrix::zeros(n1, n2);
        for i in 0..n1 {
            let urow = self.u.row(i);
            let orow = out.row_mut(i);
            for k in 0..r {
                if shrunk[k] == 0.0 {
                    continue;
                }
                let coef = urow[k] * shrunk[k];
                for (o, &v) in orow.iter_mut().zip(self.vh.row(k)) {
                    *o += coef * v;
                }
            }
        }
        out
    }

    pub fn recompose(&self) -> ComplexMatrix {
        self.recompose_with(|s| s)
    }
}

fn decompose(m: &ComplexMatrix, vectors: bool) -> Result<SVD<Complex64, nalgebra::Dyn, nalgebra::Dyn>> {
    if !m.is_finite() {
        return Err(Error::Degenerate(format!(
            "SVD input {}x{} has non-finite entries",
            m.rows(),
            m.cols()
        )));
    }
    SVD::try_new(m.to_nalgebra(), vectors, vectors, f64::EPSILON, MAX_SVD_SWEEPS).ok_or(Error::SvdNoConvergence {
        rows: m.rows(),
        cols: m.cols(),
    })
}

/// Full thin SVD with singular values sorted in non-increasing order.
pub fn svd(m: &ComplexMatrix) -> Result<SvdResult> {
    let dec = decompose(m, true)?;
    let u = dec.u.as_ref().expect("U requested");
    let vt = dec.v_t.as_ref().expect("V^H requested");
    Ok(SvdResult {
        u: ComplexMatrix::from_nalgebra(u),
        singular_values: dec.singular_values.iter().copied().collect(),
        vh: ComplexMatrix::from_nalgebra(vt),
    })
}

/// Singular values only, non-increasing.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let dec = decompose(m, false)?;
    let mut s: Vec<f64> = dec.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Norms of a single matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatrixNorms {
    pub nuclear: f64,
    pub spectral: f64,
    pub frobenius: f64,
    pub l1: f64,
}

pub fn matrix_norms(m: &ComplexMatrix) -> Result<MatrixNorms> {
    let s = singular_values(m)?;
    Ok(MatrixNorms {
        nuclear: s.iter().sum(),
        spectral: s.first().copied().unwrap_or(0.0),
        frobenius: m.frobenius_norm(),
        l1: m.l1_norm(),
    })
}

/// Sum of singular values.
pub fn nuclear_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(m)?.iter().sum())
}

pub fn spectral_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// Complex soft threshold `Θ_λ(a) = e^{i arg a} max(|a| − λ, 0)`.
#[inline]
pub fn soft_threshold(a: Complex64, lambda: f64) -> Complex64 {
    debug_assert!(lambda >= 0.0);
    let mag = a.norm();
    if mag <= lambda {
        Complex64::new(0.0, 0.0)
    } else {
        a * ((mag - lambda) / mag)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::test_util::random_matrix;
    use approx::assert_relative_eq;

    #[test]
    fn identity_and_diagonal() {
        let s = svd(&ComplexMatrix::identity(3)).unwrap();
        for v in &s.singular_values {
            assert_relative_eq!(*v, 1.0, epsilon = 1e-14);
        }
        let s = svd(&ComplexMatrix::from_diagonal(&[2.0, 3.0])).unwrap();
        assert_relative_eq!(s.singular_values[0], 3.0, epsilon = 1e-14);
        assert_relative_eq!(s.singular_values[1], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn reconstructs_random_5x4() {
        let m = random_matrix(5, 4, 11);
        let s = svd(&m).unwrap();
        assert_eq!(s.u.shape(), (5, 4));
        assert_eq!(s.vh.shape(), (4, 4));
        let err = s.recompose().distance(&m) / m.frobenius_norm();
        assert!(err <= 1e-10, "reconstruction error {err}");
    }

    #[test]
    fn orthonormal_factors_and_ordering() {
        for &(r, c) in &[(7, 3), (3, 7), (16, 16), (64, 40)] {
            let m = random_matrix(r, c, (r * 100 + c) as u64);
            let s = svd(&m).unwrap();
            let uhu = s.u.conj_transpose().matmul(&s.u).unwrap();
            let vvh = s.vh.matmul(&s.vh.conj_transpose()).unwrap();
            let k = r.min(c);
            let id = ComplexMatrix::identity(k);
            assert!(uhu.distance(&id) < 1e-10);
            assert!(vvh.distance(&id) < 1e-10);
            assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
            assert!(s.singular_values.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn norms_of_diag_3_2() {
        let n = matrix_norms(&ComplexMatrix::from_diagonal(&[3.0, 2.0])).unwrap();
        assert_relative_eq!(n.nuclear, 5.0, epsilon = 1e-14);
        assert_relative_eq!(n.spectral, 3.0, epsilon = 1e-14);
        assert_relative_eq!(n.frobenius, 13f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(n.l1, 5.0, epsilon = 1e-14);
    }

    #[test]
    fn rank_one_unit_outer_product() {
        let u = random_matrix(6, 1, 3);
        let v = random_matrix(1, 4, 4);
        let u = u.scale(1.0 / u.frobenius_norm());
        let v = v.scale(1.0 / v.frobenius_norm());
        let m = u.matmul(&v).unwrap();
        assert_relative_eq!(nuclear_norm(&m).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn norm_ordering_random_6x6() {
        let n = matrix_norms(&random_matrix(6, 6, 99)).unwrap();
        assert!(n.nuclear >= n.frobenius && n.frobenius >= n.spectral);
    }

    #[test]
    fn soft_threshold_examples() {
        let c = Complex64::new;
        assert_eq!(soft_threshold(c(3.0, 0.0), 1.0), c(2.0, 0.0));
        assert_eq!(soft_threshold(c(1.0, 0.0), 2.0), c(0.0, 0.0));
        assert_eq!(soft_threshold(c(-2.0, 0.0), 1.0), c(-1.0, 0.0));
        assert_eq!(soft_threshold(c(0.3, -0.4), 0.0), c(0.3, -0.4));
    }

    #[test]
    fn rejects_non_finite_input() {
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 0)] = Complex64::new(f64::INFINITY, 0.0);
        assert!(svd(&m).is_err());
    }
}
