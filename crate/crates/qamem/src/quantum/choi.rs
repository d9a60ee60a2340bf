use crate::error::Result;
use crate::linalg::{self, eig_hermitian, hermitize, vec_col, CMat, CVec, C64, ZERO};
use crate::quantum::channel::KrausChannel;

/// Choi matrix J = sum_a |K_a>> <<K_a| with column-stacking vectorization,
/// so the row index j*N + i pairs input j with output i. tr J = N for a
/// trace-preserving channel.
#[derive(Debug, Clone)]
pub struct ChoiMatrix {
    mat: CMat,
    dim: usize,
}

pub fn choi_of(channel: &KrausChannel) -> ChoiMatrix {
    let n = channel.dim();
    let mut mat = CMat::from_elem((n * n, n * n), ZERO);
    for k in channel.ops() {
        let v: CVec = vec_col(k);
        for r in 0..n * n {
            for c in 0..n * n {
                mat[(r, c)] += v[r] * v[c].conj();
            }
        }
    }
    ChoiMatrix { mat, dim: n }
}

impl ChoiMatrix {
    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn trace(&self) -> C64 {
        linalg::trace(&self.mat)
    }

    /// Reconstruct the channel action from the Choi matrix.
    pub fn apply(&self, rho: &CMat) -> CMat {
        let n = self.dim;
        let mut out = CMat::from_elem((n, n), ZERO);
        for i in 0..n {
            for k in 0..n {
                let mut acc = ZERO;
                for j in 0..n {
                    for l in 0..n {
                        acc += self.mat[(j * n + i, l * n + k)] * rho[(j, l)];
                    }
                }
                out[(i, k)] = acc;
            }
        }
        out
    }

    /// Max-abs residual of the partial trace over the output factor
    /// against the identity (trace preservation).
    pub fn trace_preservation_residual(&self) -> f64 {
        let n = self.dim;
        let mut res = 0.0f64;
        for j in 0..n {
            for l in 0..n {
                let mut acc = ZERO;
                for i in 0..n {
                    acc += self.mat[(j * n + i, l * n + i)];
                }
                let target = if j == l { 1.0 } else { 0.0 };
                res = res.max((acc - C64::new(target, 0.0)).norm());
            }
        }
        res
    }

    /// Smallest eigenvalue; nonnegative (up to tolerance) iff the map is
    /// completely positive.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let (vals, _) = eig_hermitian(&hermitize(&self.mat))?;
        Ok(vals.iter().cloned().fold(f64::INFINITY, f64::min))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_channel_choi_is_maximally_entangled() {
        let ch = KrausChannel::identity(2);
        let j = choi_of(&ch);
        assert_abs_diff_eq!(j.trace().re, 2.0, epsilon = 1e-12);
        // rank 1: J = |Omega><Omega| with <Omega| = (1,0,0,1)
        for (r, expect_r) in [(0usize, 1.0), (3, 1.0)] {
            assert_abs_diff_eq!(j.mat()[(r, r)].re, expect_r, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(j.mat()[(0, 3)].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(j.trace_preservation_residual(), 0.0, epsilon = 1e-12);
        assert!(j.min_eigenvalue().unwrap() > -1e-12);
    }

    #[test]
    fn choi_reconstructs_channel_action() {
        let q = 0.4f64;
        let k0 = ndarray::array![[ONE, ZERO], [ZERO, C64::new((1.0 - q).sqrt(), 0.0)]];
        let k1 = ndarray::array![[ZERO, C64::new(q.sqrt(), 0.0)], [ZERO, ZERO]];
        let ch = KrausChannel::new(vec![k0, k1], crate::hilbert::SpaceLayout::trivial(2)).unwrap();
        let j = choi_of(&ch);
        let rho = ndarray::array![
            [C64::new(0.3, 0.0), C64::new(0.1, 0.2)],
            [C64::new(0.1, -0.2), C64::new(0.7, 0.0)]
        ];
        let direct = ch.apply_mat(&rho);
        let via_choi = j.apply(&rho);
        assert!(linalg::max_abs(&(&direct - &via_choi)) < 1e-12);
    }
}
