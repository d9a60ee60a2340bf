use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, dagger, eig_hermitian, eye, hermitize, matmul, CMat, CVec, C64, ZERO};
use crate::quantum::state::DensityOperator;
use crate::rng::rng_from;

/// Positive operator-valued measure with named outcomes.
#[derive(Debug, Clone)]
pub struct Povm {
    effects: Vec<CMat>,
    labels: Vec<String>,
    /// Uniform factor applied to the supplied effects when completing a
    /// nearly-complete set; 1.0 when nothing was rescaled.
    rescale_factor: f64,
}

#[derive(Debug, Clone)]
pub struct MeasureOutcome {
    pub index: usize,
    pub label: String,
    pub probabilities: Vec<f64>,
}

impl Povm {
    pub fn new(effects: Vec<CMat>, labels: Vec<String>, tol: f64) -> Result<Self> {
        if effects.is_empty() || effects.len() != labels.len() {
            return Err(Error::InvalidPovm("effects/labels mismatch".into()));
        }
        let n = effects[0].nrows();
        let mut total = CMat::from_elem((n, n), ZERO);
        for e in &effects {
            if e.nrows() != n || e.ncols() != n {
                return Err(Error::InvalidPovm("effect dimension mismatch".into()));
            }
            if linalg::max_abs(&(e - &dagger(e))) > tol {
                return Err(Error::InvalidPovm("effect not Hermitian".into()));
            }
            let (vals, _) = eig_hermitian(&hermitize(e))?;
            let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            if min < -tol {
                return Err(Error::InvalidPovm(format!(
                    "effect eigenvalue {min:.3e} negative"
                )));
            }
            total = &total + e;
        }
        let res = linalg::max_abs(&(&total - &eye(n)));
        if res > tol {
            return Err(Error::InvalidPovm(format!(
                "completeness residual {res:.3e}"
            )));
        }
        Ok(Povm { effects, labels, rescale_factor: 1.0 })
    }

    /// Rank-one effects |psi_k><psi_k| completed by the leftover effect
    /// labeled "?". If the supplied states overcomplete the identity the
    /// rank-one effects are scaled down uniformly by the smallest factor
    /// that restores positivity of the completion.
    pub fn from_states_completed(states: &[CVec], labels: Vec<String>, tol: f64) -> Result<Self> {
        if states.is_empty() || states.len() != labels.len() {
            return Err(Error::InvalidPovm("states/labels mismatch".into()));
        }
        let n = states[0].len();
        let mut sum = CMat::from_elem((n, n), ZERO);
        let mut effects = Vec::with_capacity(states.len() + 1);
        for psi in states {
            let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
            if norm2 <= 0.0 {
                return Err(Error::InvalidPovm("zero outcome state".into()));
            }
            let e = CMat::from_shape_fn((n, n), |(i, j)| {
                psi[i] * psi[j].conj() / C64::new(norm2, 0.0)
            });
            sum = &sum + &e;
            effects.push(e);
        }
        let (vals, _) = eig_hermitian(&hermitize(&sum))?;
        let max = vals.iter().cloned().fold(0.0f64, f64::max);
        let factor = if max > 1.0 + tol { 1.0 / max } else { 1.0 };
        if factor < 1.0 {
            for e in effects.iter_mut() {
                e.mapv_inplace(|z| z * factor);
            }
            sum.mapv_inplace(|z| z * factor);
        }
        let rest = &eye(n) - &sum;
        effects.push(rest);
        let mut labels = labels;
        labels.push("?".into());
        let povm = Povm { effects, labels, rescale_factor: factor };
        // completion is exact by construction; validate defensively
        povm.validate(10.0 * tol.max(1e-12))?;
        Ok(povm)
    }

    fn validate(&self, tol: f64) -> Result<()> {
        let n = self.effects[0].nrows();
        let mut total = CMat::from_elem((n, n), ZERO);
        for e in &self.effects {
            let (vals, _) = eig_hermitian(&hermitize(e))?;
            let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            if min < -tol {
                return Err(Error::InvalidPovm(format!(
                    "completed effect eigenvalue {min:.3e}"
                )));
            }
            total = &total + e;
        }
        let res = linalg::max_abs(&(&total - &eye(n)));
        if res > tol {
            return Err(Error::InvalidPovm(format!("completion residual {res:.3e}")));
        }
        Ok(())
    }

    pub fn effects(&self) -> &[CMat] {
        &self.effects
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rescale_factor(&self) -> f64 {
        self.rescale_factor
    }

    pub fn outcome_probabilities(&self, rho: &DensityOperator) -> Vec<f64> {
        let mut probs: Vec<f64> = self
            .effects
            .iter()
            .map(|e| linalg::trace(&matmul(e, rho.mat())).re.max(0.0))
            .collect();
        let total: f64 = probs.iter().sum();
        if total > 0.0 {
            for p in probs.iter_mut() {
                *p /= total;
            }
        }
        probs
    }

    /// Born-rule probabilities for a pure state.
    pub fn outcome_probabilities_pure(&self, psi: &CVec) -> Vec<f64> {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        let mut probs: Vec<f64> = self
            .effects
            .iter()
            .map(|e| {
                let ep = e.dot(psi);
                let mut acc = ZERO;
                for (a, b) in psi.iter().zip(ep.iter()) {
                    acc += a.conj() * b;
                }
                (acc.re / norm2).max(0.0)
            })
            .collect();
        let total: f64 = probs.iter().sum();
        if total > 0.0 {
            for p in probs.iter_mut() {
                *p /= total;
            }
        }
        probs
    }

    /// Sample one outcome with a freshly seeded generator.
    pub fn measure(&self, rho: &DensityOperator, seed: u64) -> MeasureOutcome {
        let probs = self.outcome_probabilities(rho);
        self.sample(probs, seed)
    }

    pub fn measure_pure(&self, psi: &CVec, seed: u64) -> MeasureOutcome {
        let probs = self.outcome_probabilities_pure(psi);
        self.sample(probs, seed)
    }

    fn sample(&self, probabilities: Vec<f64>, seed: u64) -> MeasureOutcome {
        let mut rng = rng_from(seed);
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut index = probabilities.len() - 1;
        for (k, p) in probabilities.iter().enumerate() {
            acc += p;
            if u < acc {
                index = k;
                break;
            }
        }
        MeasureOutcome {
            index,
            label: self.labels[index].clone(),
            probabilities,
        }
    }
}

/// Square-root ("pretty good") measurement for a family of pure states:
/// E_k = Phi^{-1/2} |psi_k><psi_k| Phi^{-1/2} with Phi = sum_k
/// |psi_k><psi_k|, completed by the projector onto the orthocomplement of
/// the span.
pub fn square_root_measurement(states: &[CVec], tol: f64) -> Result<Povm> {
    if states.is_empty() {
        return Err(Error::InvalidPovm("no states".into()));
    }
    let n = states[0].len();
    let mut phi = CMat::from_elem((n, n), ZERO);
    for psi in states {
        for i in 0..n {
            for j in 0..n {
                phi[(i, j)] += psi[i] * psi[j].conj();
            }
        }
    }
    let (vals, vecs) = eig_hermitian(&phi)?;
    let top = vals.iter().cloned().fold(0.0f64, f64::max);
    if top <= 0.0 {
        return Err(Error::SingularFrame { value: top, cutoff: 0.0 });
    }
    let cutoff = top * tol.max(1e-13);
    // inverse square root on the range, range projector alongside
    let mut inv_sqrt = CMat::from_elem((n, n), ZERO);
    let mut range = CMat::from_elem((n, n), ZERO);
    let mut rank = 0usize;
    for (k, &v) in vals.iter().enumerate() {
        if v <= cutoff {
            continue;
        }
        rank += 1;
        let w = C64::new(1.0 / v.sqrt(), 0.0);
        let col = vecs.column(k);
        for i in 0..n {
            for j in 0..n {
                let outer = col[i] * col[j].conj();
                inv_sqrt[(i, j)] += w * outer;
                range[(i, j)] += outer;
            }
        }
    }
    if rank == 0 {
        return Err(Error::SingularFrame { value: top, cutoff });
    }
    let mut effects = Vec::with_capacity(states.len() + 1);
    let mut labels = Vec::with_capacity(states.len() + 1);
    for (k, psi) in states.iter().enumerate() {
        let w = inv_sqrt.dot(psi);
        let e = CMat::from_shape_fn((n, n), |(i, j)| w[i] * w[j].conj());
        effects.push(e);
        labels.push(format!("state-{k}"));
    }
    effects.push(&eye(n) - &range);
    labels.push("outside-span".into());
    Ok(Povm { effects, labels, rescale_factor: 1.0 })
}
