//! Continuous-time dynamics: Liouvillian construction, exact evolution,
//! spectral analysis, metastable manifolds and stochastic unravelings.

mod metastable;
mod spectrum;
mod trajectory;

pub use metastable::{
    basis_probes, detect_metastable_manifold, locate_gap, MetastableManifold, SpectralGap,
};
pub use spectrum::{spectrum_of, Spectrum};
pub use trajectory::{ensemble_expectations, trajectory, Trajectory, TrajectoryOptions};

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg::{
    self, anticommutator, commutator, dagger, expm, eye, kron, matmul, unvec_col, vec_col, CMat,
    C64,
};
use crate::quantum::{DensityOperator, KrausChannel};

/// Markovian generator d rho/dt = -i[H, rho]
/// + sum_l gamma_l (F_l rho F_l^dag - (1/2){F_l^dag F_l, rho}).
#[derive(Debug)]
pub struct Liouvillian {
    h: CMat,
    jumps: Vec<(f64, CMat)>,
    dim: usize,
    superop: OnceLock<CMat>,
    spectrum: OnceLock<Spectrum>,
}

impl Clone for Liouvillian {
    fn clone(&self) -> Self {
        Liouvillian {
            h: self.h.clone(),
            jumps: self.jumps.clone(),
            dim: self.dim,
            superop: OnceLock::new(),
            spectrum: OnceLock::new(),
        }
    }
}

pub fn build_liouvillian(h: CMat, jumps: Vec<(f64, CMat)>) -> Result<Liouvillian> {
    let dim = h.nrows();
    if h.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: h.ncols(),
            context: "Hamiltonian".into(),
        });
    }
    let herm = linalg::max_abs(&(&h - &dagger(&h)));
    if herm > 1e-9 {
        return Err(Error::NonHermitianHamiltonian(herm));
    }
    for (rate, f) in &jumps {
        if *rate < 0.0 {
            return Err(Error::NegativeRate(*rate));
        }
        if f.nrows() != dim || f.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: f.nrows(),
                context: "jump operator".into(),
            });
        }
    }
    Ok(Liouvillian {
        h,
        jumps,
        dim,
        superop: OnceLock::new(),
        spectrum: OnceLock::new(),
    })
}

impl Liouvillian {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &CMat {
        &self.h
    }

    pub fn jumps(&self) -> &[(f64, CMat)] {
        &self.jumps
    }

    /// Generator action on a matrix.
    pub fn apply_mat(&self, rho: &CMat) -> CMat {
        let mut out = commutator(&self.h, rho) * C64::new(0.0, -1.0);
        for (rate, f) in &self.jumps {
            let g = C64::new(*rate, 0.0);
            let fd = dagger(f);
            let fdf = matmul(&fd, f);
            let sandwich = matmul(f, &matmul(rho, &fd));
            let anti = anticommutator(&fdf, rho);
            out = &out + &((&sandwich - &(&anti * C64::new(0.5, 0.0))) * g);
        }
        out
    }

    /// Heisenberg-picture action on an observable.
    pub fn apply_adjoint_mat(&self, obs: &CMat) -> CMat {
        let mut out = commutator(&self.h, obs) * C64::new(0.0, 1.0);
        for (rate, f) in &self.jumps {
            let g = C64::new(*rate, 0.0);
            let fd = dagger(f);
            let fdf = matmul(&fd, f);
            let sandwich = matmul(&fd, &matmul(obs, f));
            let anti = anticommutator(&fdf, obs);
            out = &out + &((&sandwich - &(&anti * C64::new(0.5, 0.0))) * g);
        }
        out
    }

    /// Column-stacking superoperator matrix, built lazily.
    pub fn superoperator(&self) -> &CMat {
        self.superop.get_or_init(|| {
            let n = self.dim;
            let id = eye(n);
            let ht = self.h.t().to_owned();
            let mut s = &kron(&id, &self.h) * C64::new(0.0, -1.0)
                + &(&kron(&ht, &id) * C64::new(0.0, 1.0));
            for (rate, f) in &self.jumps {
                let g = C64::new(*rate, 0.0);
                let fconj = f.mapv(|z| z.conj());
                let fd = dagger(f);
                let fdf = matmul(&fd, f);
                let fdft = fdf.t().to_owned();
                let half = C64::new(0.5, 0.0);
                s = &s
                    + &((&kron(&fconj, f)
                        - &(&(&kron(&id, &fdf) + &kron(&fdft, &id)) * half))
                        * g);
            }
            s
        })
    }

    /// Full spectral decomposition, computed once and cached.
    pub fn spectrum(&self) -> Result<&Spectrum> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s);
        }
        let s = Spectrum::compute(self)?;
        let _ = self.spectrum.set(s);
        Ok(self.spectrum.get().expect("just set"))
    }

    pub fn spectrum_if_cached(&self) -> Option<&Spectrum> {
        self.spectrum.get()
    }

    /// Non-Hermitian effective Hamiltonian H - (i/2) sum gamma F^dag F.
    pub fn effective_hamiltonian(&self) -> CMat {
        let mut heff = self.h.clone();
        for (rate, f) in &self.jumps {
            let fdf = matmul(&dagger(f), f);
            heff = &heff - &(&fdf * C64::new(0.0, 0.5 * rate));
        }
        heff
    }

    /// Propagate by time t. Uses the Pade exponential of the superoperator
    /// for moderate dimensions, the cached spectral decomposition otherwise
    /// (or whenever it is already available).
    pub fn evolve(&self, rho0: &DensityOperator, t: f64) -> Result<DensityOperator> {
        Ok(self.evolve_grid(rho0, &[t])?.pop().expect("one point"))
    }

    pub fn evolve_grid(&self, rho0: &DensityOperator, ts: &[f64]) -> Result<Vec<DensityOperator>> {
        if rho0.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: rho0.dim(),
                context: "evolve".into(),
            });
        }
        let use_spectral = self.spectrum.get().is_some() || self.dim * self.dim > 4096;
        if use_spectral {
            let spec = self.spectrum()?;
            let mut out = Vec::with_capacity(ts.len());
            for &t in ts {
                out.push(state_from_evolution(&spec.reconstruct(rho0.mat(), t))?);
            }
            return Ok(out);
        }

        // uniform grids share one step propagator
        let uniform = ts.len() > 1 && {
            let dt = ts[1] - ts[0];
            ts[0].abs() < 1e-12
                && dt > 0.0
                && ts.windows(2)
                    .all(|w| ((w[1] - w[0]) - dt).abs() < 1e-9 * dt.max(1.0))
        };
        let s = self.superoperator();
        let mut out = Vec::with_capacity(ts.len());
        if uniform {
            let dt = ts[1] - ts[0];
            let step = expm(&(s * C64::new(dt, 0.0)))?;
            let mut v = vec_col(rho0.mat());
            out.push(state_from_evolution(&unvec_col(&v, self.dim))?);
            for _ in 1..ts.len() {
                v = step.dot(&v);
                out.push(state_from_evolution(&unvec_col(&v, self.dim))?);
            }
        } else {
            for &t in ts {
                let prop = expm(&(s * C64::new(t, 0.0)))?;
                let v = prop.dot(&vec_col(rho0.mat()));
                out.push(state_from_evolution(&unvec_col(&v, self.dim))?);
            }
        }
        Ok(out)
    }

    /// Unique steady state from the zero mode of the spectrum.
    pub fn steady_state(&self) -> Result<DensityOperator> {
        let spec = self.spectrum()?;
        let scale = spec
            .eigenvalues
            .iter()
            .map(|l| l.re.abs())
            .fold(0.0f64, f64::max)
            .max(1e-12);
        let zeros = spec.zero_modes(1e-10 * scale);
        if zeros != 1 {
            return Err(Error::DegenerateSteadyState(zeros));
        }
        state_from_evolution(spec.right(0))
    }
}

/// Validate an evolved matrix as a state at the looser tolerance numerical
/// propagation warrants.
fn state_from_evolution(mat: &CMat) -> Result<DensityOperator> {
    let tr = linalg::trace(mat);
    if tr.re.abs() < 1e-12 {
        return Err(Error::NotAState("evolved matrix has zero trace".into()));
    }
    let normed = mat.mapv(|z| z / tr);
    DensityOperator::with_tol(normed, 1e-6)
}

#[derive(Debug, Clone)]
pub struct SymmetryReport {
    pub comm_h: f64,
    pub comm_jumps: Vec<f64>,
    /// Norm of the adjoint generator applied to the candidate, i.e. the
    /// instantaneous drift of its expectation value.
    pub adjoint_residual: f64,
    pub conserved: bool,
}

/// Strong symmetry check: J commutes with the Hamiltonian and every jump
/// operator, hence is conserved in expectation for every initial state.
pub fn check_strong_symmetry(lv: &Liouvillian, j: &CMat, tol: f64) -> SymmetryReport {
    let comm_h = linalg::max_abs(&commutator(j, lv.hamiltonian()));
    let comm_jumps: Vec<f64> = lv
        .jumps()
        .iter()
        .map(|(_, f)| linalg::max_abs(&commutator(j, f)))
        .collect();
    let adjoint_residual = linalg::max_abs(&lv.apply_adjoint_mat(j));
    let conserved =
        comm_h <= tol && comm_jumps.iter().all(|&c| c <= tol) && adjoint_residual <= tol;
    SymmetryReport {
        comm_h,
        comm_jumps,
        adjoint_residual,
        conserved,
    }
}

#[derive(Debug, Clone)]
pub struct ProjectorReport {
    pub max_commutator: f64,
    pub heisenberg_residual: f64,
    /// True when the two sides of the equivalence agree: J commutes with
    /// every Kraus operator iff the channel conserves J in the Heisenberg
    /// picture.
    pub consistent: bool,
}

/// Discrete-time counterpart: a projector J satisfies channel^dag(J) = J
/// exactly when it commutes with every Kraus operator.
pub fn check_conserved_projector(ch: &KrausChannel, j: &CMat, tol: f64) -> ProjectorReport {
    let max_commutator = ch
        .ops()
        .iter()
        .map(|k| linalg::max_abs(&commutator(j, k)))
        .fold(0.0f64, f64::max);
    let back = ch.apply_adjoint_mat(j);
    let heisenberg_residual = linalg::max_abs(&(&back - j));
    let consistent = (max_commutator <= tol) == (heisenberg_residual <= tol);
    ProjectorReport {
        max_commutator,
        heisenberg_residual,
        consistent,
    }
}
