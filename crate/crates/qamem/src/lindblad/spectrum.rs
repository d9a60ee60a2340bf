//! Spectral decomposition of a Liouvillian superoperator.

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::linalg::{
    self, canonical_phase_mat, eig_general, eye, frobenius, inverse, matmul, trace,
    unvec_col, vec_col, CMat, CVec, C64,
};

use super::Liouvillian;

/// Right/left eigen-decomposition of the generator, modes sorted by |Re|
/// ascending so the steady state comes first and decay accelerates along
/// the list.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<C64>,
    right: Vec<CMat>,
    left: Vec<CMat>,
    /// Conjugated rows of the inverse eigenvector matrix; coefficient
    /// extraction is a plain inner product against these.
    left_vecs: Vec<CVec>,
    pub biorthogonality_residual: f64,
    dim: usize,
}

pub fn spectrum_of(lv: &Liouvillian) -> Result<&Spectrum> {
    lv.spectrum()
}

impl Spectrum {
    pub(super) fn compute(lv: &Liouvillian) -> Result<Spectrum> {
        let dim = lv.dim();
        let s = lv.superoperator();
        let (vals, vecs) = eig_general(s)?;
        let n2 = dim * dim;

        let mut order: Vec<usize> = (0..n2).collect();
        order.sort_by(|&a, &b| {
            vals[a]
                .re
                .abs()
                .partial_cmp(&vals[b].re.abs())
                .unwrap()
                .then(vals[b].im.partial_cmp(&vals[a].im).unwrap())
        });

        let mut eigenvalues = Vec::with_capacity(n2);
        let mut right = Vec::with_capacity(n2);
        let mut v_norm = CMat::zeros((n2, n2));
        for (slot, &k) in order.iter().enumerate() {
            eigenvalues.push(vals[k]);
            let mut r = unvec_col(&vecs.column(k).to_owned(), dim);
            let tr = trace(&r);
            let fro = frobenius(&r);
            if fro < 1e-300 {
                return Err(Error::Invalid("zero eigenvector from solver".into()));
            }
            if tr.norm() > 1e-8 * fro {
                // trace-class mode: normalize to unit trace
                r.mapv_inplace(|z| z / tr);
            } else {
                r.mapv_inplace(|z| z / C64::new(fro, 0.0));
                r = canonical_phase_mat(&r);
            }
            let v = vec_col(&r);
            v_norm.column_mut(slot).assign(&v);
            right.push(r);
        }

        let v_inv = inverse(&v_norm)?;
        let biorthogonality_residual =
            linalg::max_abs(&(&matmul(&v_inv, &v_norm) - &eye(n2)));

        let mut left = Vec::with_capacity(n2);
        let mut left_vecs = Vec::with_capacity(n2);
        for k in 0..n2 {
            let row: CVec = Array1::from_iter(v_inv.row(k).iter().map(|z| z.conj()));
            left.push(unvec_col(&row, dim));
            left_vecs.push(row);
        }

        Ok(Spectrum {
            eigenvalues,
            right,
            left,
            left_vecs,
            biorthogonality_residual,
            dim,
        })
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eigenvalue(&self, k: usize) -> C64 {
        self.eigenvalues[k]
    }

    pub fn right(&self, k: usize) -> &CMat {
        &self.right[k]
    }

    pub fn left(&self, k: usize) -> &CMat {
        &self.left[k]
    }

    /// Overlap coefficient c_k = tr(L_k^dag rho).
    pub fn coefficient(&self, k: usize, rho: &CMat) -> C64 {
        let v = vec_col(rho);
        self.left_vecs[k]
            .iter()
            .zip(v.iter())
            .map(|(l, r)| l.conj() * r)
            .sum()
    }

    /// rho(t) = sum_k c_k exp(lambda_k t) R_k over the first `modes` modes.
    pub fn reconstruct_partial(&self, rho0: &CMat, t: f64, modes: usize) -> CMat {
        let mut out = CMat::zeros((self.dim, self.dim));
        let v0 = vec_col(rho0);
        for k in 0..modes.min(self.len()) {
            let c: C64 = self.left_vecs[k]
                .iter()
                .zip(v0.iter())
                .map(|(l, r)| l.conj() * r)
                .sum();
            let w = c * (self.eigenvalues[k] * C64::new(t, 0.0)).exp();
            if w.norm() < 1e-300 {
                continue;
            }
            out.zip_mut_with(&self.right[k], |o, r| *o += w * r);
        }
        out
    }

    pub fn reconstruct(&self, rho0: &CMat, t: f64) -> CMat {
        self.reconstruct_partial(rho0, t, self.len())
    }

    pub fn zero_modes(&self, tol: f64) -> usize {
        self.eigenvalues
            .iter()
            .filter(|l| l.re.abs() <= tol && l.im.abs() <= tol)
            .count()
    }

    /// Residual of the eigenpair equation for mode k, relative to |lambda|+1.
    pub fn mode_residual(&self, lv: &Liouvillian, k: usize) -> f64 {
        let r = &self.right[k];
        let lhs = lv.apply_mat(r);
        let rhs = r * self.eigenvalues[k];
        linalg::max_abs(&(&lhs - &rhs)) / (self.eigenvalues[k].norm() + 1.0)
    }

    /// Left eigenpair residual: L^dag L_k = conj(lambda_k) L_k in the
    /// Heisenberg picture.
    pub fn left_mode_residual(&self, lv: &Liouvillian, k: usize) -> f64 {
        let l = &self.left[k];
        let lhs = lv.apply_adjoint_mat(l);
        let rhs = l * self.eigenvalues[k].conj();
        linalg::max_abs(&(&lhs - &rhs)) / (self.eigenvalues[k].norm() + 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::build_liouvillian;
    use crate::linalg::{dagger, ONE, ZERO};
    use crate::quantum::DensityOperator;
    use approx::assert_abs_diff_eq;

    #[test]
    fn damping_spectrum_rates() {
        let gamma = 0.8;
        let h = CMat::from_elem((2, 2), ZERO);
        let f = ndarray::array![[ZERO, ONE], [ZERO, ZERO]];
        let lv = build_liouvillian(h, vec![(gamma, f)]).unwrap();
        let spec = lv.spectrum().unwrap();
        let mut rates: Vec<f64> = spec.eigenvalues.iter().map(|l| -l.re).collect();
        rates.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_abs_diff_eq!(rates[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rates[1], gamma / 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(rates[2], gamma / 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(rates[3], gamma, epsilon = 1e-10);
        assert_eq!(spec.zero_modes(1e-10), 1);
        assert!(spec.biorthogonality_residual < 1e-10);
    }

    #[test]
    fn reconstruction_matches_exponential_evolution() {
        // driven, damped qubit: no symmetry, complex spectrum
        let h = ndarray::array![
            [C64::new(0.4, 0.0), C64::new(0.3, 0.1)],
            [C64::new(0.3, -0.1), C64::new(-0.4, 0.0)]
        ];
        let f = ndarray::array![[ZERO, ONE], [ZERO, ZERO]];
        let lv = build_liouvillian(h.clone(), vec![(0.6, f.clone())]).unwrap();
        let rho0 = DensityOperator::basis(2, 1);
        let via_expm = lv.evolve(&rho0, 0.9).unwrap();

        let lv2 = build_liouvillian(h, vec![(0.6, f)]).unwrap();
        let spec = lv2.spectrum().unwrap();
        let rebuilt = spec.reconstruct(rho0.mat(), 0.9);
        assert!(linalg::max_abs(&(via_expm.mat() - &rebuilt)) < 1e-9);
        for k in 0..4 {
            assert!(spec.mode_residual(&lv2, k) < 1e-9);
            assert!(spec.left_mode_residual(&lv2, k) < 1e-9);
        }
    }

    #[test]
    fn steady_mode_has_unit_trace() {
        let h = CMat::from_elem((2, 2), ZERO);
        let f = ndarray::array![[ZERO, ONE], [ZERO, ZERO]];
        let lv = build_liouvillian(h, vec![(1.0, f)]).unwrap();
        let spec = lv.spectrum().unwrap();
        let tr = trace(spec.right(0));
        assert_abs_diff_eq!(tr.re, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(tr.im, 0.0, epsilon = 1e-10);
        // coefficient of the steady mode in any state is 1
        let rho = DensityOperator::maximally_mixed(2);
        let c = spec.coefficient(0, rho.mat());
        assert_abs_diff_eq!(c.re, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn uses_dagger_free_inner_product() {
        // coefficient must equal tr(L_k^dag rho) with the stored left matrix
        let h = ndarray::array![
            [C64::new(0.2, 0.0), C64::new(0.0, 0.5)],
            [C64::new(0.0, -0.5), C64::new(-0.2, 0.0)]
        ];
        let f = ndarray::array![[ZERO, ZERO], [ONE, ZERO]];
        let lv = build_liouvillian(h, vec![(0.3, f)]).unwrap();
        let spec = lv.spectrum().unwrap();
        let rho = DensityOperator::basis(2, 0);
        for k in 0..4 {
            let direct = trace(&matmul(&dagger(spec.left(k)), rho.mat()));
            let fast = spec.coefficient(k, rho.mat());
            assert!((direct - fast).norm() < 1e-12);
        }
    }
}
