//! Classical Hopfield network baseline: Hebbian couplings, asynchronous
//! sign updates, and seeded retrieval statistics.
//!
//! Couplings are kept as the integer matrix n*J_ij = sum_mu xi_i xi_j so
//! the energy ledger is exact; monotonicity is then an integer statement
//! with no floating-point slack.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from};

#[derive(Debug, Clone)]
pub struct HopfieldNet {
    pub n_neurons: usize,
    /// n * J_ij as exact integers; zero diagonal, symmetric.
    pub scaled_couplings: Array2<i64>,
    pub patterns: Vec<Vec<i8>>,
}

impl HopfieldNet {
    /// J_ij = (1/n) sum_mu xi_i xi_j with the diagonal removed.
    pub fn couplings(&self) -> Array2<f64> {
        let n = self.n_neurons as f64;
        self.scaled_couplings.mapv(|v| v as f64 / n)
    }

    /// Local field times n: sum_j (n J_ij) s_j.
    fn scaled_field(&self, state: &[i8], i: usize) -> i64 {
        let mut h = 0i64;
        for (j, &s) in state.iter().enumerate() {
            h += self.scaled_couplings[(i, j)] * s as i64;
        }
        h
    }

    /// Energy times n: -sum_{i<j} (n J_ij) s_i s_j. Exact.
    pub fn scaled_energy(&self, state: &[i8]) -> i64 {
        let mut e = 0i64;
        for i in 0..self.n_neurons {
            for j in (i + 1)..self.n_neurons {
                e -= self.scaled_couplings[(i, j)] * (state[i] * state[j]) as i64;
            }
        }
        e
    }

    pub fn energy(&self, state: &[i8]) -> f64 {
        self.scaled_energy(state) as f64 / self.n_neurons as f64
    }
}

fn check_spins(state: &[i8], n: usize) -> Result<()> {
    if state.len() != n || state.iter().any(|&s| s != 1 && s != -1) {
        return Err(Error::NotSpinVector);
    }
    Ok(())
}

pub fn hebbian_couplings(patterns: &[Vec<i8>]) -> Result<HopfieldNet> {
    let n = match patterns.first() {
        Some(p) if !p.is_empty() => p.len(),
        _ => return Err(Error::Invalid("need at least one nonempty pattern".into())),
    };
    for p in patterns {
        check_spins(p, n)?;
    }
    let mut nj = Array2::zeros((n, n));
    for p in patterns {
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    nj[(i, j)] += (p[i] * p[j]) as i64;
                }
            }
        }
    }
    Ok(HopfieldNet {
        n_neurons: n,
        scaled_couplings: nj,
        patterns: patterns.to_vec(),
    })
}

#[derive(Debug, Clone)]
pub struct HopfieldTrajectory {
    /// State after each completed sweep, starting with the input.
    pub states: Vec<Vec<i8>>,
    /// Scaled energy after every single-neuron update.
    pub energies: Vec<i64>,
    pub sweeps: usize,
    pub converged: bool,
}

impl HopfieldTrajectory {
    pub fn final_state(&self) -> &[i8] {
        self.states.last().expect("at least the input state").as_slice()
    }
}

/// Asynchronous updates s_i <- sgn(h_i), sgn(0) -> +1, visiting neurons in
/// a fresh seeded random order each sweep, until a full sweep flips
/// nothing or `max_sweeps` is reached.
pub fn hopfield_update(
    net: &HopfieldNet,
    state: &[i8],
    max_sweeps: usize,
    seed: u64,
) -> Result<HopfieldTrajectory> {
    check_spins(state, net.n_neurons)?;
    let mut rng = rng_from(seed);
    let mut s = state.to_vec();
    let mut order: Vec<usize> = (0..net.n_neurons).collect();
    let mut energy = net.scaled_energy(&s);
    let mut states = vec![s.clone()];
    let mut energies = vec![energy];
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        order.shuffle(&mut rng);
        let mut flipped = false;
        for &i in &order {
            let h = net.scaled_field(&s, i);
            let target: i8 = if h >= 0 { 1 } else { -1 };
            if s[i] != target {
                // flipping i changes the scaled energy by 2 s_i h_i
                energy += 2 * s[i] as i64 * h;
                s[i] = target;
                flipped = true;
            }
            energies.push(energy);
        }
        sweeps += 1;
        states.push(s.clone());
        if !flipped {
            converged = true;
            break;
        }
    }
    Ok(HopfieldTrajectory {
        states,
        energies,
        sweeps,
        converged,
    })
}

fn random_spins(n: usize, rng: &mut impl Rng) -> Vec<i8> {
    (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect()
}

/// One instrumented trial of the retrieval experiment: the target pattern,
/// the corrupted probe, and the relaxation trajectory it produced.
#[derive(Debug, Clone)]
pub struct RetrievalSample {
    pub target: Vec<i8>,
    pub probe: Vec<i8>,
    pub trajectory: HopfieldTrajectory,
    pub success: bool,
}

fn retrieval_trial(
    n: usize,
    m: usize,
    n_flip: usize,
    max_sweeps: usize,
    trial_seed: u64,
) -> Result<RetrievalSample> {
    let mut rng = rng_from(trial_seed);
    let patterns: Vec<Vec<i8>> = (0..m).map(|_| random_spins(n, &mut rng)).collect();
    let net = hebbian_couplings(&patterns)?;
    let target = rng.gen_range(0..m);
    let mut probe = patterns[target].clone();
    let mut sites: Vec<usize> = (0..n).collect();
    sites.shuffle(&mut rng);
    for &i in sites.iter().take(n_flip) {
        probe[i] = -probe[i];
    }
    let trajectory = hopfield_update(&net, &probe, max_sweeps, rng.gen())?;
    let success = trajectory.converged && trajectory.final_state() == patterns[target].as_slice();
    Ok(RetrievalSample {
        target: patterns[target].clone(),
        probe,
        trajectory,
        success,
    })
}

/// Monte Carlo retrieval rate: each trial draws m fresh random patterns,
/// corrupts one by flipping floor(corrupt_frac * n) spins, and counts the
/// trial a success when the dynamics converge back to it exactly.
pub fn retrieval_success_rate(
    n: usize,
    m: usize,
    corrupt_frac: f64,
    trials: usize,
    max_sweeps: usize,
    seed: u64,
) -> Result<f64> {
    if n == 0 || m == 0 || trials == 0 {
        return Err(Error::Invalid("n, m and trials must be positive".into()));
    }
    if !(0.0..=1.0).contains(&corrupt_frac) {
        return Err(Error::Invalid("corrupt_frac must lie in [0, 1]".into()));
    }
    let n_flip = (corrupt_frac * n as f64).floor() as usize;
    let mut successes = 0usize;
    for trial in 0..trials {
        let sample = retrieval_trial(n, m, n_flip, max_sweeps, derive_seed(seed, trial as u64))?;
        if sample.success {
            successes += 1;
        }
    }
    Ok(successes as f64 / trials as f64)
}

/// Trial `trial` of the Monte Carlo retrieval experiment, with the full
/// trajectory kept for inspection. Shares the seed derivation with
/// `retrieval_success_rate`, so sample k reproduces its trial k.
pub fn sample_retrieval(
    n: usize,
    m: usize,
    corrupt_frac: f64,
    max_sweeps: usize,
    seed: u64,
    trial: u64,
) -> Result<RetrievalSample> {
    if n == 0 || m == 0 {
        return Err(Error::Invalid("n and m must be positive".into()));
    }
    if !(0.0..=1.0).contains(&corrupt_frac) {
        return Err(Error::Invalid("corrupt_frac must lie in [0, 1]".into()));
    }
    let n_flip = (corrupt_frac * n as f64).floor() as usize;
    retrieval_trial(n, m, n_flip, max_sweeps, derive_seed(seed, trial))
}
