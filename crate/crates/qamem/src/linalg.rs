//! Dense complex linear algebra on `ndarray` carriers, with the heavy
//! kernels (eigendecompositions, LU) delegated to `faer`.

use faer::prelude::*;
use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = Array2<C64>;
pub type CVec = Array1<C64>;

pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn eye(n: usize) -> CMat {
    Array2::from_shape_fn((n, n), |(i, j)| if i == j { ONE } else { ZERO })
}

pub fn dagger(a: &CMat) -> CMat {
    let (n, m) = a.dim();
    Array2::from_shape_fn((m, n), |(i, j)| a[(j, i)].conj())
}

pub fn hermitize(a: &CMat) -> CMat {
    let ad = dagger(a);
    (a + &ad) * C64::new(0.5, 0.0)
}

pub fn trace(a: &CMat) -> C64 {
    a.diag().sum()
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn frobenius(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Matrix 1-norm (max absolute column sum), used by the exponential scaling.
pub fn one_norm(a: &CMat) -> f64 {
    let (n, m) = a.dim();
    (0..m)
        .map(|j| (0..n).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn to_faer(a: &CMat) -> Mat<c64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| {
        let z = a[(i, j)];
        c64::new(z.re, z.im)
    })
}

fn from_faer(m: MatRef<'_, c64>) -> CMat {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| {
        let z = m[(i, j)];
        C64::new(z.re, z.im)
    })
}

/// Matrix product. Small operands stay in `ndarray`; larger ones go through
/// faer's gemm, which is much faster than the generic fallback.
pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.nrows(), "matmul shape");
    if a.nrows().max(a.ncols()).max(b.ncols()) < 48 {
        a.dot(b)
    } else {
        let prod = to_faer(a) * to_faer(b);
        from_faer(prod.as_ref())
    }
}

pub fn matvec(a: &CMat, v: &CVec) -> CVec {
    a.dot(v)
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    &matmul(a, b) - &matmul(b, a)
}

pub fn anticommutator(a: &CMat, b: &CMat) -> CMat {
    &matmul(a, b) + &matmul(b, a)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    Array2::from_shape_fn((ra * rb, ca * cb), |(i, j)| {
        a[(i / rb, j / cb)] * b[(i % rb, j % cb)]
    })
}

/// Column-stacking vectorization: `vec(a)[j*n + i] = a[i, j]`.
pub fn vec_col(a: &CMat) -> CVec {
    let (n, m) = a.dim();
    Array1::from_shape_fn(n * m, |k| a[(k % n, k / n)])
}

pub fn unvec_col(v: &CVec, nrows: usize) -> CMat {
    let ncols = v.len() / nrows;
    assert_eq!(nrows * ncols, v.len(), "unvec shape");
    Array2::from_shape_fn((nrows, ncols), |(i, j)| v[j * nrows + i])
}

/// Solve `a x = b` by partial-pivot LU.
pub fn solve(a: &CMat, b: &CMat) -> Result<CMat> {
    if a.nrows() != a.ncols() || a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: b.nrows(),
            context: "solve".into(),
        });
    }
    let lu = to_faer(a).partial_piv_lu();
    let x = lu.solve(to_faer(b));
    Ok(from_faer(x.as_ref()))
}

pub fn inverse(a: &CMat) -> Result<CMat> {
    solve(a, &eye(a.nrows()))
}

/// Matrix counterpart of `canonical_phase`: rescale by a unit phase so the
/// largest-modulus entry (first in row-major order on ties) is real positive.
pub fn canonical_phase_mat(m: &CMat) -> CMat {
    let mut best = ZERO;
    let mut best_mod = 0.0f64;
    for z in m.iter() {
        let n = z.norm();
        if n > best_mod + 1e-14 {
            best_mod = n;
            best = *z;
        }
    }
    if best_mod == 0.0 {
        return m.clone();
    }
    let fix = (best / C64::new(best_mod, 0.0)).conj();
    m.mapv(|z| z * fix)
}

/// Fix the global phase of a column so its largest-modulus entry is real
/// and positive. Makes eigenvector output deterministic.
fn canonical_phase(col: &mut ndarray::ArrayViewMut1<'_, C64>) {
    let mut best = 0usize;
    let mut best_mod = 0.0f64;
    for (i, z) in col.iter().enumerate() {
        let m = z.norm();
        if m > best_mod + 1e-14 {
            best_mod = m;
            best = i;
        }
    }
    if best_mod > 0.0 {
        let phase = col[best] / C64::new(best_mod, 0.0);
        let fix = phase.conj();
        for z in col.iter_mut() {
            *z *= fix;
        }
    }
}

/// Eigendecomposition of a Hermitian matrix. Returns eigenvalues in
/// descending order with phase-canonicalized eigenvectors as columns;
/// exact ties are broken lexicographically on the vector components.
pub fn eig_hermitian(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.ncols(),
            context: "eig_hermitian".into(),
        });
    }
    let evd = to_faer(a)
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Invalid(format!("hermitian eigensolver failed: {e:?}")))?;
    let s = evd.S();
    let u = from_faer(evd.U());
    let mut vals: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    let mut vecs = u;
    for mut col in vecs.columns_mut() {
        canonical_phase(&mut col);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        vals[j]
            .partial_cmp(&vals[i])
            .unwrap()
            .then_with(|| lex_cmp(&vecs.column(i).to_owned(), &vecs.column(j).to_owned()))
    });
    let sorted_vals: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let sorted_vecs = Array2::from_shape_fn((n, n), |(i, j)| vecs[(i, order[j])]);
    vals = sorted_vals;
    vecs = sorted_vecs;
    Ok((vals, vecs))
}

fn lex_cmp(a: &CVec, b: &CVec) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.re.partial_cmp(&y.re).unwrap() {
            std::cmp::Ordering::Equal => {}
            o => return o,
        }
        match x.im.partial_cmp(&y.im).unwrap() {
            std::cmp::Ordering::Equal => {}
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// Eigendecomposition of a general complex matrix: eigenvalues plus the
/// matrix of right eigenvectors (columns, phase-canonicalized).
pub fn eig_general(a: &CMat) -> Result<(Vec<C64>, CMat)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.ncols(),
            context: "eig_general".into(),
        });
    }
    let evd = to_faer(a)
        .eigen()
        .map_err(|e| Error::Invalid(format!("eigensolver failed: {e:?}")))?;
    let s = evd.S();
    let mut vecs = from_faer(evd.U());
    let vals: Vec<C64> = (0..n).map(|i| C64::new(s[i].re, s[i].im)).collect();
    for mut col in vecs.columns_mut() {
        canonical_phase(&mut col);
    }
    Ok((vals, vecs))
}

/// Principal square root of a positive semidefinite Hermitian matrix.
/// Eigenvalues below zero (numerical noise) are clamped.
pub fn sqrtm_psd(a: &CMat) -> Result<CMat> {
    let (vals, vecs) = eig_hermitian(a)?;
    let n = a.nrows();
    let mut out = Array2::from_elem((n, n), ZERO);
    for (k, &v) in vals.iter().enumerate() {
        let r = v.max(0.0).sqrt();
        if r == 0.0 {
            continue;
        }
        let col = vecs.column(k);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += C64::new(r, 0.0) * col[i] * col[j].conj();
            }
        }
    }
    Ok(out)
}

// Pade-13 coefficients for the scaling-and-squaring exponential
// (Higham, SIAM J. Matrix Anal. Appl. 26(4), 2005).
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by Pade-13 scaling and squaring.
pub fn expm(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.ncols(),
            context: "expm".into(),
        });
    }
    let norm = one_norm(a);
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let scale = C64::new(0.5f64.powi(s), 0.0);
    let a1 = a * scale;
    let id = eye(n);

    let a2 = matmul(&a1, &a1);
    let a4 = matmul(&a2, &a2);
    let a6 = matmul(&a2, &a4);

    let b = |k: usize| C64::new(PADE13[k], 0.0);
    let w1 = &a6 * b(13) + &a4 * b(11) + &a2 * b(9);
    let w2 = &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &id * b(1);
    let u = matmul(&a1, &(&matmul(&a6, &w1) + &w2));
    let z1 = &a6 * b(12) + &a4 * b(10) + &a2 * b(8);
    let v = &matmul(&a6, &z1) + &(&a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &id * b(0));

    let vm = &v - &u;
    let vp = &v + &u;
    let mut x = solve(&vm, &vp)?;
    for _ in 0..s {
        x = matmul(&x, &x);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sigma_x() -> CMat {
        ndarray::array![[ZERO, ONE], [ONE, ZERO]]
    }

    #[test]
    fn expm_diagonal() {
        let a = ndarray::array![
            [C64::new(1.0, 0.0), ZERO],
            [ZERO, C64::new(-2.0, 0.5)]
        ];
        let e = expm(&a).unwrap();
        assert_abs_diff_eq!(e[(0, 0)].re, 1f64.exp(), epsilon = 1e-12);
        let z = C64::new(-2.0, 0.5).exp();
        assert_abs_diff_eq!(e[(1, 1)].re, z.re, epsilon = 1e-12);
        assert_abs_diff_eq!(e[(1, 1)].im, z.im, epsilon = 1e-12);
        assert_abs_diff_eq!(e[(0, 1)].norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn expm_pauli_rotation() {
        // exp(-i theta sigma_x) = cos(theta) I - i sin(theta) sigma_x
        let theta = 0.7;
        let a = sigma_x() * C64::new(0.0, -theta);
        let e = expm(&a).unwrap();
        assert_abs_diff_eq!(e[(0, 0)].re, theta.cos(), epsilon = 1e-13);
        assert_abs_diff_eq!(e[(0, 1)].im, -theta.sin(), epsilon = 1e-13);
    }

    #[test]
    fn expm_large_norm_scales() {
        let a = sigma_x() * C64::new(0.0, -40.0);
        let e = expm(&a).unwrap();
        assert_abs_diff_eq!(e[(0, 0)].re, 40f64.cos(), epsilon = 1e-10);
        assert_abs_diff_eq!(e[(0, 1)].im, -(40f64.sin()), epsilon = 1e-10);
    }

    #[test]
    fn hermitian_eig_descending() {
        let h = ndarray::array![
            [C64::new(1.0, 0.0), C64::new(0.0, -1.0)],
            [C64::new(0.0, 1.0), C64::new(-1.0, 0.0)]
        ];
        let (vals, vecs) = eig_hermitian(&h).unwrap();
        let r = 2f64.sqrt();
        assert_abs_diff_eq!(vals[0], r, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], -r, epsilon = 1e-12);
        // residual || H v - lambda v ||
        for k in 0..2 {
            let v = vecs.column(k).to_owned();
            let hv = h.dot(&v);
            for i in 0..2 {
                let d = hv[i] - C64::new(vals[k], 0.0) * v[i];
                assert!(d.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn general_eig_residual() {
        let a = ndarray::array![
            [C64::new(0.1, 0.3), C64::new(1.0, 0.0), ZERO],
            [ZERO, C64::new(-0.4, 0.0), C64::new(0.0, 2.0)],
            [C64::new(0.5, 0.0), ZERO, C64::new(0.2, -0.1)]
        ];
        let (vals, vecs) = eig_general(&a).unwrap();
        for k in 0..3 {
            let v = vecs.column(k).to_owned();
            let av = a.dot(&v);
            for i in 0..3 {
                let d = av[i] - vals[k] * v[i];
                assert!(d.norm() < 1e-10, "residual {}", d.norm());
            }
        }
    }

    #[test]
    fn solve_and_inverse() {
        let a = ndarray::array![
            [C64::new(2.0, 0.0), C64::new(0.0, 1.0)],
            [C64::new(0.0, -1.0), C64::new(3.0, 0.0)]
        ];
        let inv = inverse(&a).unwrap();
        let prod = matmul(&a, &inv);
        assert!(max_abs(&(&prod - &eye(2))) < 1e-13);
    }

    #[test]
    fn kron_and_vec_roundtrip() {
        let a = ndarray::array![[ONE, ZERO], [ZERO, C64::new(2.0, 0.0)]];
        let b = sigma_x();
        let k = kron(&a, &b);
        assert_eq!(k[(0, 1)], ONE);
        assert_eq!(k[(2, 3)], C64::new(2.0, 0.0));
        let v = vec_col(&k);
        let back = unvec_col(&v, 4);
        assert_eq!(k, back);
    }

    #[test]
    fn vec_col_is_column_stacking() {
        let a = ndarray::array![
            [C64::new(1.0, 0.0), C64::new(3.0, 0.0)],
            [C64::new(2.0, 0.0), C64::new(4.0, 0.0)]
        ];
        let v = vec_col(&a);
        let got: Vec<f64> = v.iter().map(|z| z.re).collect();
        assert_eq!(got, vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn sqrtm_of_projector() {
        let p = ndarray::array![
            [C64::new(0.5, 0.0), C64::new(0.5, 0.0)],
            [C64::new(0.5, 0.0), C64::new(0.5, 0.0)]
        ];
        let r = sqrtm_psd(&p).unwrap();
        assert!(max_abs(&(&matmul(&r, &r) - &p)) < 1e-12);
    }
}
