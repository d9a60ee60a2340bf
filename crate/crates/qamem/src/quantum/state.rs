use crate::error::{Error, Result};
use crate::linalg::{
    self, dagger, eig_hermitian, hermitize, matmul, sqrtm_psd, trace, CMat, CVec, C64, ZERO,
};

/// Default numerical tolerance for state and channel validation.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A validated density operator: Hermitian, unit trace, positive
/// semidefinite up to the construction tolerance. Eigenvalues in
/// `[-tol, 0)` are clamped to zero; anything lower is rejected.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    mat: CMat,
}

impl DensityOperator {
    pub fn new(mat: CMat) -> Result<Self> {
        Self::with_tol(mat, DEFAULT_TOL)
    }

    pub fn with_tol(mat: CMat, tol: f64) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch {
                expected: mat.nrows(),
                got: mat.ncols(),
                context: "density operator".into(),
            });
        }
        let herm_res = linalg::max_abs(&(&mat - &dagger(&mat)));
        if herm_res > tol {
            return Err(Error::NotAState(format!(
                "hermiticity residual {herm_res:.3e} above {tol:.1e}"
            )));
        }
        let tr = trace(&mat);
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::NotAState(format!(
                "trace {tr} is not 1 within {tol:.1e}"
            )));
        }
        let mut clean = hermitize(&mat);
        clean.mapv_inplace(|z| z / tr.re);
        let (vals, vecs) = eig_hermitian(&clean)?;
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -tol {
            return Err(Error::NotAState(format!(
                "negative eigenvalue {min:.3e} below -{tol:.1e}"
            )));
        }
        if min < 0.0 {
            // Clamp numerical negativity and renormalize.
            let n = clean.nrows();
            let mut rebuilt = CMat::from_elem((n, n), ZERO);
            let total: f64 = vals.iter().map(|v| v.max(0.0)).sum();
            for (k, &v) in vals.iter().enumerate() {
                let w = v.max(0.0) / total;
                if w == 0.0 {
                    continue;
                }
                let col = vecs.column(k);
                for i in 0..n {
                    for j in 0..n {
                        rebuilt[(i, j)] += C64::new(w, 0.0) * col[i] * col[j].conj();
                    }
                }
            }
            clean = rebuilt;
        }
        Ok(DensityOperator { mat: clean })
    }

    pub fn from_pure(psi: &CVec) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if norm2 <= 0.0 {
            return Err(Error::NotAState("zero vector".into()));
        }
        let n = psi.len();
        let mat = CMat::from_shape_fn((n, n), |(i, j)| {
            psi[i] * psi[j].conj() / C64::new(norm2, 0.0)
        });
        Ok(DensityOperator { mat })
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut mat = CMat::from_elem((dim, dim), ZERO);
        mat[(i, i)] = linalg::ONE;
        DensityOperator { mat }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let mut mat = CMat::from_elem((dim, dim), ZERO);
        for i in 0..dim {
            mat[(i, i)] = C64::new(1.0 / dim as f64, 0.0);
        }
        DensityOperator { mat }
    }

    /// Classical mixture of states on the same space. Weights are
    /// normalized; negative weights are rejected.
    pub fn mixture(parts: &[(f64, DensityOperator)]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::NotAState("empty mixture".into()));
        }
        let dim = parts[0].1.dim();
        let total: f64 = parts.iter().map(|(w, _)| *w).sum();
        if total <= 0.0 || parts.iter().any(|(w, _)| *w < 0.0) {
            return Err(Error::NotAState("mixture weights must be >= 0".into()));
        }
        let mut mat = CMat::from_elem((dim, dim), ZERO);
        for (w, rho) in parts {
            if rho.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: rho.dim(),
                    context: "mixture".into(),
                });
            }
            mat = &mat + &(rho.mat() * C64::new(w / total, 0.0));
        }
        Ok(DensityOperator { mat })
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn into_mat(self) -> CMat {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn purity(&self) -> f64 {
        trace(&matmul(&self.mat, &self.mat)).re
    }

    pub fn expectation(&self, obs: &CMat) -> C64 {
        trace(&matmul(obs, &self.mat))
    }

    /// tr(rho sigma), real part.
    pub fn overlap(&self, other: &DensityOperator) -> f64 {
        trace(&matmul(&self.mat, &other.mat)).re
    }

    /// Trace distance (1/2)||rho - sigma||_1 from the eigenvalues of the
    /// Hermitian difference.
    pub fn trace_distance(&self, other: &DensityOperator) -> f64 {
        trace_distance_mat(&self.mat, &other.mat)
    }

    /// Uhlmann fidelity [tr sqrt(sqrt(rho) sigma sqrt(rho))]^2.
    pub fn fidelity(&self, other: &DensityOperator) -> Result<f64> {
        let r = sqrtm_psd(&self.mat)?;
        let inner = matmul(&r, &matmul(&other.mat, &r));
        let (vals, _) = eig_hermitian(&hermitize(&inner))?;
        let s: f64 = vals.iter().map(|v| v.max(0.0).sqrt()).sum();
        Ok(s * s)
    }
}

/// Trace distance between two (not necessarily validated) Hermitian
/// matrices.
pub fn trace_distance_mat(a: &CMat, b: &CMat) -> f64 {
    let diff = hermitize(&(a - b));
    let (vals, _) = eig_hermitian(&diff).expect("square hermitian difference");
    0.5 * vals.iter().map(|v| v.abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pure_state_has_unit_purity() {
        let psi = ndarray::array![C64::new(1.0, 0.0), C64::new(0.0, 1.0)];
        let rho = DensityOperator::from_pure(&psi).unwrap();
        assert_abs_diff_eq!(rho.purity(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(trace(rho.mat()).re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_nonpositive() {
        let mat = ndarray::array![
            [C64::new(1.5, 0.0), ZERO],
            [ZERO, C64::new(-0.5, 0.0)]
        ];
        assert!(matches!(
            DensityOperator::new(mat),
            Err(Error::NotAState(_))
        ));
    }

    #[test]
    fn clamps_tiny_negativity() {
        let eps = 1e-12;
        let mat = ndarray::array![
            [C64::new(1.0 + eps, 0.0), ZERO],
            [ZERO, C64::new(-eps, 0.0)]
        ];
        let rho = DensityOperator::new(mat).unwrap();
        assert!(rho.mat()[(1, 1)].re >= 0.0);
        assert_abs_diff_eq!(trace(rho.mat()).re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn trace_distance_of_orthogonal_pures_is_one() {
        let a = DensityOperator::basis(2, 0);
        let b = DensityOperator::basis(2, 1);
        assert_abs_diff_eq!(a.trace_distance(&b), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a.trace_distance(&a), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn fidelity_limits() {
        let a = DensityOperator::basis(2, 0);
        let b = DensityOperator::basis(2, 1);
        let m = DensityOperator::maximally_mixed(2);
        assert_abs_diff_eq!(a.fidelity(&a).unwrap(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(a.fidelity(&b).unwrap(), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(a.fidelity(&m).unwrap(), 0.5, epsilon = 1e-10);
    }
}
