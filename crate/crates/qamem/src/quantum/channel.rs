use ndarray::s;

use crate::error::{Error, Result};
use crate::hilbert::SpaceLayout;
use crate::linalg::{self, dagger, eye, matmul, CMat, ZERO};
use crate::quantum::state::DensityOperator;

/// A quantum channel in Kraus form, tied to a space layout so the
/// stable/decaying block structure can be checked.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    ops: Vec<CMat>,
    layout: SpaceLayout,
}

/// Residuals of the complete-positivity/trace-preservation conditions.
/// The three block conditions are the trace-preservation identity written
/// out for an upper-triangular Kraus set: on the stable subspace, on the
/// stable-decaying cross terms, and on the decaying subspace.
#[derive(Debug, Clone)]
pub struct CptpReport {
    pub completeness_residual: f64,
    pub block_structure_residual: f64,
    pub stable_residual: f64,
    pub cross_residual: f64,
    pub decay_residual: f64,
    pub tol: f64,
    pub is_cptp: bool,
}

#[derive(Debug, Clone)]
pub struct FixedPointRun {
    pub state: DensityOperator,
    pub iterations: usize,
    pub converged: bool,
    pub final_delta: f64,
}

impl KrausChannel {
    pub fn new(ops: Vec<CMat>, layout: SpaceLayout) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::EmptyKrausSet);
        }
        let dim = layout.dim();
        for k in &ops {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: k.nrows(),
                    context: "Kraus operator".into(),
                });
            }
        }
        Ok(KrausChannel { ops, layout })
    }

    pub fn unitary(u: CMat) -> Result<Self> {
        let dim = u.nrows();
        Self::new(vec![u], SpaceLayout::trivial(dim))
    }

    pub fn identity(dim: usize) -> Self {
        KrausChannel {
            ops: vec![eye(dim)],
            layout: SpaceLayout::trivial(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn ops(&self) -> &[CMat] {
        &self.ops
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    /// Raw linear action sum_a K_a m K_a^dag, without state validation.
    pub fn apply_mat(&self, m: &CMat) -> CMat {
        let n = self.dim();
        let mut out = CMat::from_elem((n, n), ZERO);
        for k in &self.ops {
            let km = matmul(k, m);
            out = &out + &matmul(&km, &dagger(k));
        }
        out
    }

    /// Heisenberg-picture action sum_a K_a^dag m K_a.
    pub fn apply_adjoint_mat(&self, m: &CMat) -> CMat {
        let n = self.dim();
        let mut out = CMat::from_elem((n, n), ZERO);
        for k in &self.ops {
            let kd = dagger(k);
            out = &out + &matmul(&kd, &matmul(m, k));
        }
        out
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: rho.dim(),
                context: "apply channel".into(),
            });
        }
        DensityOperator::new(self.apply_mat(rho.mat()))
    }

    /// Repeated application until successive outputs are closer than `tol`
    /// in trace distance, or `max_iters` is reached.
    pub fn iterate_to_fixed_point(
        &self,
        rho0: &DensityOperator,
        tol: f64,
        max_iters: usize,
    ) -> Result<FixedPointRun> {
        let mut state = rho0.clone();
        let mut delta = f64::INFINITY;
        for it in 1..=max_iters {
            let next = self.apply(&state)?;
            delta = next.trace_distance(&state);
            state = next;
            if delta < tol {
                return Ok(FixedPointRun {
                    state,
                    iterations: it,
                    converged: true,
                    final_delta: delta,
                });
            }
        }
        Ok(FixedPointRun {
            state,
            iterations: max_iters,
            converged: false,
            final_delta: delta,
        })
    }

    /// Trace-norm residual ||L(rho) - rho||_1.
    pub fn check_fixed_point(&self, rho: &DensityOperator) -> f64 {
        let out = self.apply_mat(rho.mat());
        let diff = &out - rho.mat();
        let (vals, _) = linalg::eig_hermitian(&linalg::hermitize(&diff))
            .expect("hermitian difference");
        vals.iter().map(|v| v.abs()).sum()
    }

    /// Verify sum_a K_a^dag K_a = 1 and, when the layout has a decaying
    /// part, the upper-triangular block structure and the three block
    /// trace-preservation conditions.
    pub fn check_cptp(&self, tol: f64) -> CptpReport {
        let n = self.dim();
        let ns = self.layout.stable_dim();
        let mut total = CMat::from_elem((n, n), ZERO);
        for k in &self.ops {
            total = &total + &matmul(&dagger(k), k);
        }
        let completeness_residual = linalg::max_abs(&(&total - &eye(n)));

        let (mut block_structure_residual, mut stable_residual) = (0.0f64, 0.0f64);
        let (mut cross_residual, mut decay_residual) = (0.0f64, 0.0f64);
        if ns > 0 && ns < n {
            let nd = n - ns;
            let mut ss = CMat::from_elem((ns, ns), ZERO);
            let mut sd = CMat::from_elem((ns, nd), ZERO);
            let mut dd = CMat::from_elem((nd, nd), ZERO);
            for k in &self.ops {
                let k_s = k.slice(s![..ns, ..ns]).to_owned();
                let k_sd = k.slice(s![..ns, ns..]).to_owned();
                let k_ds = k.slice(s![ns.., ..ns]).to_owned();
                let k_d = k.slice(s![ns.., ns..]).to_owned();
                block_structure_residual = block_structure_residual.max(linalg::max_abs(&k_ds));
                let ksd = dagger(&k_s);
                ss = &ss + &matmul(&ksd, &k_s);
                sd = &sd + &matmul(&ksd, &k_sd);
                dd = &dd + &(&matmul(&dagger(&k_sd), &k_sd) + &matmul(&dagger(&k_d), &k_d));
            }
            stable_residual = linalg::max_abs(&(&ss - &eye(ns)));
            cross_residual = linalg::max_abs(&sd);
            decay_residual = linalg::max_abs(&(&dd - &eye(nd)));
        }

        let is_cptp = completeness_residual <= tol
            && block_structure_residual <= tol
            && stable_residual <= tol
            && cross_residual <= tol
            && decay_residual <= tol;
        CptpReport {
            completeness_residual,
            block_structure_residual,
            stable_residual,
            cross_residual,
            decay_residual,
            tol,
            is_cptp,
        }
    }
}
