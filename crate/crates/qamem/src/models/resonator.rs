//! Driven-dissipative resonator with an n-photon drive and n-photon loss.
//!
//! In the weak-symmetry regime (gamma_1 > 0) the n coherent lobes are
//! metastable phases and serve as patterns for classifying noisy coherent
//! inputs. With the linear loss switched off the Z_n symmetry becomes
//! strong, the lobe superpositions turn into n-cat steady states, and the
//! memory corrects reset-to-vacuum errors within a symmetry sector.

use ndarray::{Array1, Array2};
use rand::Rng;

use crate::error::{Error, Result};
use crate::lindblad::{
    build_liouvillian, locate_gap, trajectory, Liouvillian, Trajectory, TrajectoryOptions,
};
use crate::linalg::{
    self, dagger, eig_hermitian, matmul, matvec, CMat, CVec, C64, ONE, ZERO,
};
use crate::quantum::Povm;
use crate::rng::{derive_seed, rng_from};

#[derive(Debug, Clone)]
pub struct ResonatorSpec {
    /// Order of the drive and of the nonlinear loss.
    pub n: usize,
    pub delta: f64,
    pub eta: f64,
    pub theta0: f64,
    pub gamma1: f64,
    pub gamma_n: f64,
    pub fock_dim: usize,
}

impl ResonatorSpec {
    /// Three-lobe working point behind the `resonator-fig5-*` presets;
    /// gamma1 = 1 gives the weak-symmetry regime, gamma1 = 0 the strong one.
    pub fn fig5(gamma1: f64) -> Self {
        ResonatorSpec {
            n: 3,
            delta: 0.4,
            eta: 1.56,
            theta0: 0.0,
            gamma1,
            gamma_n: 0.2,
            fock_dim: 40,
        }
    }

    /// Lobe radius r with r^n = 2 eta / gamma_n.
    pub fn lobe_radius(&self) -> f64 {
        (2.0 * self.eta / self.gamma_n).powf(1.0 / self.n as f64)
    }

    pub fn lobe_angle(&self, j: usize) -> f64 {
        2.0 * std::f64::consts::PI * j as f64 / self.n as f64 + self.theta0
    }

    pub fn lobe_amplitude(&self, j: usize) -> C64 {
        C64::from_polar(self.lobe_radius(), self.lobe_angle(j))
    }
}

pub fn annihilation(dim: usize) -> CMat {
    let mut a = Array2::from_elem((dim, dim), ZERO);
    for k in 1..dim {
        a[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
    }
    a
}

pub fn number_operator(dim: usize) -> CMat {
    let mut n = Array2::from_elem((dim, dim), ZERO);
    for k in 0..dim {
        n[(k, k)] = C64::new(k as f64, 0.0);
    }
    n
}

fn matpow(a: &CMat, p: usize) -> CMat {
    let mut out = linalg::eye(a.nrows());
    for _ in 0..p {
        out = matmul(&out, a);
    }
    out
}

/// Coherent state truncated to the Fock cutoff and renormalized; the
/// second value is the weight lost to truncation.
pub fn coherent_state(dim: usize, alpha: C64) -> (CVec, f64) {
    let mut c = Array1::from_elem(dim, ZERO);
    let mut amp = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    c[0] = amp;
    for k in 1..dim {
        amp *= alpha / C64::new((k as f64).sqrt(), 0.0);
        c[k] = amp;
    }
    let kept: f64 = c.iter().map(|z| z.norm_sqr()).sum();
    let tail = (1.0 - kept).max(0.0);
    let normed = c.mapv(|z| z / C64::new(kept.sqrt(), 0.0));
    (normed, tail)
}

/// Projector on the Z_n symmetry sector mu (Fock states n*a + mu).
pub fn sector_projector(dim: usize, n: usize, mu: usize) -> CMat {
    let mut p = Array2::from_elem((dim, dim), ZERO);
    for k in 0..dim {
        if k % n == mu % n {
            p[(k, k)] = ONE;
        }
    }
    p
}

fn validate(spec: &ResonatorSpec) -> Result<()> {
    if spec.n < 2 {
        return Err(Error::Invalid(
            "resonator needs drive order n >= 2".into(),
        ));
    }
    for &rate in &[spec.gamma1, spec.gamma_n] {
        if rate < 0.0 {
            return Err(Error::NegativeRate(rate));
        }
    }
    if spec.gamma_n <= 0.0 {
        return Err(Error::Invalid(
            "nonlinear loss rate must be positive; the lobe radius diverges".into(),
        ));
    }
    let r = spec.lobe_radius();
    let needed = r * r + 6.0 * r;
    let mut worst_tail = 0.0f64;
    for j in 0..spec.n {
        let (_, tail) = coherent_state(spec.fock_dim, spec.lobe_amplitude(j));
        worst_tail = worst_tail.max(tail);
    }
    if (spec.fock_dim as f64) < needed || worst_tail > 1e-6 {
        return Err(Error::TruncationTooSmall {
            dim: spec.fock_dim,
            tail: worst_tail,
        });
    }
    Ok(())
}

pub fn build_resonator(spec: &ResonatorSpec) -> Result<Liouvillian> {
    validate(spec)?;
    let dim = spec.fock_dim;
    let a = annihilation(dim);
    let an = matpow(&a, spec.n);
    // Drive sign pins the semiclassical lobes to theta_j = 2 pi j / n + theta0;
    // the opposite sign rotates the whole lobe set by pi / n.
    let phase = C64::from_polar(1.0, spec.theta0 * spec.n as f64);
    let drive = &an * (C64::new(0.0, -spec.eta) * phase.conj());
    let h = &(&number_operator(dim) * C64::new(spec.delta, 0.0)) + &(&drive + &dagger(&drive));
    let mut jumps = Vec::new();
    if spec.gamma1 > 0.0 {
        jumps.push((spec.gamma1, a));
    }
    jumps.push((spec.gamma_n, an));
    build_liouvillian(h, jumps)
}

/// Quadrature-space integration grid for the basin projectors.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub n_radial: usize,
    pub n_angular: usize,
    pub r_max: f64,
}

impl QuadratureGrid {
    pub fn for_spec(spec: &ResonatorSpec) -> Self {
        QuadratureGrid {
            n_radial: 400,
            n_angular: 400,
            r_max: spec.lobe_radius() + 4.0,
        }
    }
}

fn simpson_weights(intervals: usize, h: f64) -> Vec<f64> {
    let m = intervals + intervals % 2; // even number of intervals
    let mut w = vec![0.0; m + 1];
    for (i, wi) in w.iter_mut().enumerate() {
        *wi = if i == 0 || i == m {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        } * h / 3.0;
    }
    w
}

/// All n basin projectors plus the completeness residual, measured as the
/// worst deviation of <alpha| sum P |alpha> from 1 over coherent states
/// with mean photon number up to r^2.
pub fn lobe_basin_projectors(
    spec: &ResonatorSpec,
    grid: &QuadratureGrid,
) -> Result<(Vec<CMat>, f64)> {
    if grid.n_radial < 2 || grid.n_angular < 2 || grid.r_max <= 0.0 {
        return Err(Error::Invalid("quadrature grid parameters must be positive".into()));
    }
    validate(spec)?;
    let dim = spec.fock_dim;
    let n = spec.n;

    // The integrand factorizes: <k|P_j|l> = (1/pi) * Rad(k,l) * Ang_j(k-l)
    // with Rad(k,l) = int R^(k+l+1) e^(-R^2)/sqrt(k! l!) dR and
    // Ang_j(d) = int_sector e^(i d phi) dphi = e^(i d theta_j) Ang_0(d).
    let m_r = grid.n_radial + grid.n_radial % 2;
    let h_r = grid.r_max / m_r as f64;
    let w_r = simpson_weights(grid.n_radial, h_r);
    // f_k(R) = R^k e^{-R^2/2}/sqrt(k!), computed by upward recursion
    let mut f = vec![vec![0.0f64; m_r + 1]; dim];
    for i in 0..=m_r {
        let r = i as f64 * h_r;
        f[0][i] = (-0.5 * r * r).exp();
        for k in 1..dim {
            f[k][i] = f[k - 1][i] * r / (k as f64).sqrt();
        }
    }
    let mut rad = Array2::zeros((dim, dim));
    for k in 0..dim {
        for l in k..dim {
            let mut s = 0.0;
            for i in 0..=m_r {
                let r = i as f64 * h_r;
                s += w_r[i] * r * f[k][i] * f[l][i];
            }
            rad[(k, l)] = s;
            rad[(l, k)] = s;
        }
    }

    let m_a = grid.n_angular + grid.n_angular % 2;
    let width = 2.0 * std::f64::consts::PI / n as f64;
    let h_a = width / m_a as f64;
    let w_a = simpson_weights(grid.n_angular, h_a);
    // reference sector centered on phi = 0
    let mut ang0 = vec![ZERO; 2 * dim - 1];
    for (di, a0) in ang0.iter_mut().enumerate() {
        let d = di as f64 - (dim as f64 - 1.0);
        let mut s = ZERO;
        for i in 0..=m_a {
            let phi = -0.5 * width + i as f64 * h_a;
            s += C64::from_polar(w_a[i], d * phi);
        }
        *a0 = s;
    }

    let inv_pi = 1.0 / std::f64::consts::PI;
    let mut projectors = Vec::with_capacity(n);
    for j in 0..n {
        let theta_j = spec.lobe_angle(j);
        let mut p = Array2::from_elem((dim, dim), ZERO);
        for k in 0..dim {
            for l in 0..dim {
                let d = k as f64 - l as f64;
                let ang = ang0[k + dim - 1 - l] * C64::from_polar(1.0, d * theta_j);
                p[(k, l)] = C64::new(rad[(k, l)] * inv_pi, 0.0) * ang;
            }
        }
        projectors.push(p);
    }

    let mut total = Array2::from_elem((dim, dim), ZERO);
    for p in &projectors {
        total = &total + p;
    }
    let r = spec.lobe_radius();
    let mut residual = 0.0f64;
    for &radius in &[0.0, 0.5 * r, r] {
        for octant in 0..8 {
            let alpha = C64::from_polar(radius, octant as f64 * std::f64::consts::PI / 4.0);
            let (psi, _) = coherent_state(dim, alpha);
            let tp = matvec(&total, &psi);
            let val: C64 = psi.iter().zip(tp.iter()).map(|(a, b)| a.conj() * b).sum();
            residual = residual.max((val.re - 1.0).abs().max(val.im.abs()));
            if radius == 0.0 {
                break;
            }
        }
    }
    if residual > 0.02 {
        return Err(Error::GridTooCoarse(residual));
    }
    Ok((projectors, residual))
}

pub fn lobe_basin_projector(
    spec: &ResonatorSpec,
    lobe: usize,
    grid: &QuadratureGrid,
) -> Result<CMat> {
    if lobe >= spec.n {
        return Err(Error::Invalid(format!("lobe index {} out of range", lobe)));
    }
    let (mut ps, _) = lobe_basin_projectors(spec, grid)?;
    Ok(ps.swap_remove(lobe))
}

/// Multimode cat states |C_mu> built from the lobes, with the phase
/// convention that puts the mu-th cat's Fock support on {n a + mu}.
#[derive(Debug, Clone)]
pub struct CatSet {
    /// Symmetrically orthonormalized cats.
    pub states: Vec<CVec>,
    /// Normalized superpositions before orthonormalization.
    pub raw: Vec<CVec>,
    /// Worst off-diagonal Gram overlap of the raw set.
    pub gram_residual: f64,
}

pub fn cat_patterns(spec: &ResonatorSpec) -> Result<CatSet> {
    validate(spec)?;
    let dim = spec.fock_dim;
    let n = spec.n;
    let mut raw = Vec::with_capacity(n);
    for mu in 0..n {
        let mut cat = Array1::from_elem(dim, ZERO);
        for k in 0..n {
            let (lobe, _) = coherent_state(dim, spec.lobe_amplitude(k));
            let phase = C64::from_polar(
                1.0,
                -2.0 * std::f64::consts::PI * (mu * k) as f64 / n as f64,
            );
            cat.zip_mut_with(&lobe, |c, l| *c += phase * l);
        }
        let norm = cat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::Invalid("cat state collapsed to zero".into()));
        }
        raw.push(cat.mapv(|z| z / C64::new(norm, 0.0)));
    }

    let mut gram = Array2::from_elem((n, n), ZERO);
    for a in 0..n {
        for b in 0..n {
            gram[(a, b)] = raw[a].iter().zip(raw[b].iter()).map(|(x, y)| x.conj() * y).sum();
        }
    }
    let mut gram_residual = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            let target = if a == b { 1.0 } else { 0.0 };
            gram_residual = gram_residual.max((gram[(a, b)] - C64::new(target, 0.0)).norm());
        }
    }

    // Loewdin orthonormalization: |C'> = sum |C> G^{-1/2}
    let (vals, vecs) = eig_hermitian(&gram)?;
    let mut g_inv_sqrt = Array2::from_elem((n, n), ZERO);
    for (k, &v) in vals.iter().enumerate() {
        if v <= 1e-12 {
            return Err(Error::SingularFrame {
                value: v,
                cutoff: 1e-12,
            });
        }
        let w = C64::new(1.0 / v.sqrt(), 0.0);
        for i in 0..n {
            for j in 0..n {
                g_inv_sqrt[(i, j)] += w * vecs[(i, k)] * vecs[(j, k)].conj();
            }
        }
    }
    let mut states = Vec::with_capacity(n);
    for mu in 0..n {
        let mut s = Array1::from_elem(dim, ZERO);
        for nu in 0..n {
            let c = g_inv_sqrt[(nu, mu)];
            s.zip_mut_with(&raw[nu], |acc, v| *acc += c * v);
        }
        let norm = s.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        states.push(s.mapv(|z| z / C64::new(norm, 0.0)));
    }

    Ok(CatSet {
        states,
        raw,
        gram_residual,
    })
}

#[derive(Debug, Clone)]
pub struct ClassificationOptions {
    pub n_inputs: usize,
    /// Minimum basin overlap for an input to count as class mu.
    pub delta: f64,
    pub seed: u64,
    /// Measurement time; defaults to 3 tau_s from the spectral gap.
    pub t_measure: Option<f64>,
    pub dt: f64,
    pub gap_threshold: f64,
    pub grid: Option<QuadratureGrid>,
}

impl ClassificationOptions {
    pub fn new(n_inputs: usize, delta: f64, seed: u64) -> Self {
        ClassificationOptions {
            n_inputs,
            delta,
            seed,
            t_measure: None,
            dt: 1e-3,
            gap_threshold: 50.0,
            grid: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClassificationReport {
    pub n_inputs: usize,
    pub delta: f64,
    pub t_measure: f64,
    pub correct: usize,
    pub misclassified: usize,
    pub unclassified: usize,
    /// correct / n_inputs.
    pub accuracy: f64,
    /// confusion[true][predicted], last column counts unclassified.
    pub confusion: Vec<Vec<usize>>,
    pub per_class_total: Vec<usize>,
    /// Rejection-sampling discards while drawing inputs.
    pub rejected_samples: usize,
}

/// Classification run behind the `resonator-fig5-weak` preset: sample
/// coherent inputs inside the basins, evolve a single trajectory each, and
/// assign the most likely outcome of the unambiguous measurement
/// {|alpha_mu><alpha_mu|, 1 - sum} at the readout time.
pub fn lobe_classification_experiment(
    spec: &ResonatorSpec,
    lv: &Liouvillian,
    opts: &ClassificationOptions,
) -> Result<ClassificationReport> {
    if spec.gamma1 <= 0.0 {
        return Err(Error::Invalid(
            "classification needs the weak-symmetry regime gamma1 > 0".into(),
        ));
    }
    if !(opts.delta >= 0.5) {
        return Err(Error::Invalid("basin rule needs delta >= 1/2".into()));
    }
    let dim = spec.fock_dim;
    let n = spec.n;
    let grid = opts
        .grid
        .clone()
        .unwrap_or_else(|| QuadratureGrid::for_spec(spec));
    let (projectors, _) = lobe_basin_projectors(spec, &grid)?;

    let t_measure = match opts.t_measure {
        Some(t) => t,
        None => {
            let gap = locate_gap(lv.spectrum()?, opts.gap_threshold)?;
            3.0 * gap.tau_s
        }
    };

    let lobes: Vec<CVec> = (0..n)
        .map(|j| coherent_state(dim, spec.lobe_amplitude(j)).0)
        .collect();
    let labels: Vec<String> = (0..n).map(|j| format!("lobe-{j}")).collect();
    let povm = Povm::from_states_completed(&lobes, labels, 1e-9)?;

    let r_sample = spec.lobe_radius() + 2.0;
    let mut sampler = rng_from(derive_seed(opts.seed, 0));
    let mut rejected = 0usize;
    let mut confusion = vec![vec![0usize; n + 1]; n];
    let mut per_class_total = vec![0usize; n];
    let mut correct = 0usize;
    let mut misclassified = 0usize;
    let mut unclassified = 0usize;

    for input in 0..opts.n_inputs {
        // area-uniform draw over the disk, kept only inside a basin
        let (psi0, label) = loop {
            let radius = r_sample * sampler.gen::<f64>().sqrt();
            let angle = 2.0 * std::f64::consts::PI * sampler.gen::<f64>();
            let alpha = C64::from_polar(radius, angle);
            let (psi, _) = coherent_state(dim, alpha);
            let mut overlaps = Vec::with_capacity(n);
            for p in &projectors {
                let pv = matvec(p, &psi);
                let q: C64 = psi.iter().zip(pv.iter()).map(|(a, b)| a.conj() * b).sum();
                overlaps.push(q.re);
            }
            let (best, &q) = overlaps
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .expect("n >= 2 lobes");
            if q >= opts.delta {
                break (psi, best);
            }
            rejected += 1;
            if rejected > 10_000 * opts.n_inputs.max(1) {
                return Err(Error::Invalid(
                    "basin sampling rejects everything; delta too close to 1?".into(),
                ));
            }
        };
        per_class_total[label] += 1;

        let traj_opts = TrajectoryOptions::new(
            t_measure,
            opts.dt,
            2,
            derive_seed(opts.seed, (2 * input + 1) as u64),
        );
        let traj = trajectory(lv, &psi0, &traj_opts)?;
        let final_state = traj.states.last().expect("snapshots");
        // Likelihood readout. The jumps act on every lobe with the same
        // magnitude, so an input's foreign basin weight survives in the
        // trajectory; a sampled single shot would misfire at that rate.
        let probs = povm.outcome_probabilities_pure(final_state);
        let outcome = probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(k, _)| k)
            .expect("n + 1 outcomes");
        if outcome < n {
            confusion[label][outcome] += 1;
            if outcome == label {
                correct += 1;
            } else {
                misclassified += 1;
            }
        } else {
            confusion[label][n] += 1;
            unclassified += 1;
        }
    }

    Ok(ClassificationReport {
        n_inputs: opts.n_inputs,
        delta: opts.delta,
        t_measure,
        correct,
        misclassified,
        unclassified,
        accuracy: correct as f64 / opts.n_inputs.max(1) as f64,
        confusion,
        per_class_total,
        rejected_samples: rejected,
    })
}

#[derive(Debug, Clone)]
pub struct CatRunReport {
    pub times: Vec<f64>,
    /// |<C_0|psi(t)>|^2 against the raw normalized cat.
    pub overlap: Vec<f64>,
    /// Population of the Z_n sector 0.
    pub sector0: Vec<f64>,
    pub post_reset_overlap: f64,
    pub jump_count: usize,
    pub reset_time: f64,
}

/// Cat run behind the `resonator-fig5-strong` preset: evolve the cat
/// pattern, reset to vacuum at `t_reset`, and watch the symmetry-protected
/// dynamics rebuild the cat.
pub fn cat_error_correction_run(
    spec: &ResonatorSpec,
    lv: &Liouvillian,
    t_reset: f64,
    t_final: f64,
    dt: f64,
    n_snapshots: usize,
    seed: u64,
) -> Result<CatRunReport> {
    if spec.gamma1 != 0.0 {
        return Err(Error::Invalid(
            "error correction needs the strong-symmetry regime gamma1 = 0".into(),
        ));
    }
    if !(t_reset > 0.0 && t_reset < t_final) {
        return Err(Error::Invalid("reset time must fall inside the run".into()));
    }
    let dim = spec.fock_dim;
    let cats = cat_patterns(spec)?;
    let c0 = &cats.raw[0];
    let p0 = sector_projector(dim, spec.n, 0);

    let frac = t_reset / t_final;
    let snaps_a = ((n_snapshots as f64 * frac).ceil() as usize).max(2);
    let snaps_b = (n_snapshots.saturating_sub(snaps_a)).max(2);

    let run_segment = |psi0: &CVec, t_len: f64, snaps: usize, stream: u64| -> Result<Trajectory> {
        let o = TrajectoryOptions::new(t_len, dt, snaps, derive_seed(seed, stream));
        trajectory(lv, psi0, &o)
    };
    let seg_a = run_segment(c0, t_reset, snaps_a, 0)?;
    let mut vacuum = Array1::from_elem(dim, ZERO);
    vacuum[0] = ONE;
    let seg_b = run_segment(&vacuum, t_final - t_reset, snaps_b, 1)?;

    let overlap_with = |psi: &CVec| -> f64 {
        let ov: C64 = c0.iter().zip(psi.iter()).map(|(a, b)| a.conj() * b).sum();
        ov.norm_sqr()
    };
    let sector_pop = |psi: &CVec| -> f64 {
        let pv = matvec(&p0, psi);
        psi.iter()
            .zip(pv.iter())
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    };

    let mut times = Vec::new();
    let mut overlap = Vec::new();
    let mut sector0 = Vec::new();
    for (t, s) in seg_a.times.iter().zip(seg_a.states.iter()) {
        times.push(*t);
        overlap.push(overlap_with(s));
        sector0.push(sector_pop(s));
    }
    let post_reset_overlap = overlap_with(&vacuum);
    for (t, s) in seg_b.times.iter().zip(seg_b.states.iter()).skip(1) {
        times.push(t_reset + *t);
        overlap.push(overlap_with(s));
        sector0.push(sector_pop(s));
    }

    Ok(CatRunReport {
        times,
        overlap,
        sector0,
        post_reset_overlap,
        jump_count: seg_a.jumps.len() + seg_b.jumps.len(),
        reset_time: t_reset,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::check_strong_symmetry;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fig5_lobe_geometry() {
        let spec = ResonatorSpec::fig5(1.0);
        assert_abs_diff_eq!(spec.lobe_radius(), 15.6f64.powf(1.0 / 3.0), epsilon = 1e-12);
        assert_abs_diff_eq!(spec.lobe_radius(), 2.4986, epsilon = 5e-4);
        assert_abs_diff_eq!(spec.lobe_angle(0), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            spec.lobe_angle(1),
            2.0 * std::f64::consts::PI / 3.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn truncation_guard() {
        let mut spec = ResonatorSpec::fig5(1.0);
        spec.fock_dim = 12;
        assert!(matches!(
            build_resonator(&spec),
            Err(Error::TruncationTooSmall { .. })
        ));
    }

    #[test]
    fn hamiltonian_is_hermitian_and_sectors_conserved() {
        let spec = ResonatorSpec::fig5(0.0);
        let lv = build_resonator(&spec).unwrap();
        for mu in 0..3 {
            let p = sector_projector(spec.fock_dim, 3, mu);
            let rep = check_strong_symmetry(&lv, &p, 1e-10);
            assert!(rep.conserved, "sector {mu} not conserved");
        }
        // linear loss breaks the strong symmetry
        let weak = build_resonator(&ResonatorSpec::fig5(1.0)).unwrap();
        let p = sector_projector(spec.fock_dim, 3, 0);
        assert!(!check_strong_symmetry(&weak, &p, 1e-10).conserved);
    }

    #[test]
    fn vacuum_decays_to_vacuum_without_drive() {
        let spec = ResonatorSpec {
            n: 2,
            delta: 0.0,
            eta: 0.0,
            theta0: 0.0,
            gamma1: 1.0,
            gamma_n: 0.4,
            fock_dim: 12,
        };
        let lv = build_resonator(&spec).unwrap();
        let ss = lv.steady_state().unwrap();
        assert!(ss.mat()[(0, 0)].re > 1.0 - 1e-8);
    }

    #[test]
    fn cats_live_on_their_fock_ladders() {
        let spec = ResonatorSpec::fig5(0.0);
        let cats = cat_patterns(&spec).unwrap();
        assert!(cats.gram_residual < 1e-4, "gram {}", cats.gram_residual);
        for (mu, cat) in cats.raw.iter().enumerate() {
            for (k, amp) in cat.iter().enumerate() {
                if k % 3 != mu {
                    assert!(
                        amp.norm() < 1e-10,
                        "cat {mu} leaks onto Fock {k}: {}",
                        amp.norm()
                    );
                }
            }
        }
        // cat is an eigenstate of a^n with eigenvalue r^n
        let a3 = matpow(&annihilation(spec.fock_dim), 3);
        let c0 = &cats.raw[0];
        let image = matvec(&a3, c0);
        let r3 = spec.lobe_radius().powi(3);
        let mut worst = 0.0f64;
        // skip the very top of the ladder where truncation bites
        for k in 0..spec.fock_dim - 3 {
            worst = worst.max((image[k] - C64::new(r3, 0.0) * c0[k]).norm());
        }
        assert!(worst < 1e-4, "a^3 eigenrelation residual {worst}");
    }

    #[test]
    fn orthonormalized_cats_match_sectors() {
        let spec = ResonatorSpec::fig5(0.0);
        let cats = cat_patterns(&spec).unwrap();
        for mu in 0..3 {
            for nu in 0..3 {
                let p = sector_projector(spec.fock_dim, 3, nu);
                let pv = matvec(&p, &cats.states[mu]);
                let val: f64 = cats.states[mu]
                    .iter()
                    .zip(pv.iter())
                    .map(|(a, b)| (a.conj() * b).re)
                    .sum();
                let want = if mu == nu { 1.0 } else { 0.0 };
                assert!((val - want).abs() < 1e-6, "sector {nu} on cat {mu}: {val}");
            }
        }
    }

    #[test]
    fn basin_projectors_complete_and_localized() {
        let spec = ResonatorSpec::fig5(1.0);
        let grid = QuadratureGrid::for_spec(&spec);
        let (ps, residual) = lobe_basin_projectors(&spec, &grid).unwrap();
        assert!(residual < 1e-3, "completeness residual {residual}");
        // each lobe sits in its own basin
        for (j, p) in ps.iter().enumerate() {
            let (lobe, _) = coherent_state(spec.fock_dim, spec.lobe_amplitude(j));
            let pv = matvec(p, &lobe);
            let q: f64 = lobe.iter().zip(pv.iter()).map(|(a, b)| (a.conj() * b).re).sum();
            assert!(q > 0.95, "lobe {j} overlap {q}");
        }
        // vacuum splits evenly
        let (vac, _) = coherent_state(spec.fock_dim, ZERO);
        for p in &ps {
            let pv = matvec(p, &vac);
            let q: f64 = vac.iter().zip(pv.iter()).map(|(a, b)| (a.conj() * b).re).sum();
            assert_abs_diff_eq!(q, 1.0 / 3.0, epsilon = 1e-3);
        }
        // a state on the sector boundary shares between two basins
        let boundary = C64::from_polar(
            spec.lobe_radius(),
            std::f64::consts::PI / 3.0,
        );
        let (psi, _) = coherent_state(spec.fock_dim, boundary);
        let q: Vec<f64> = ps
            .iter()
            .map(|p| {
                let pv = matvec(p, &psi);
                psi.iter().zip(pv.iter()).map(|(a, b)| (a.conj() * b).re).sum()
            })
            .collect();
        assert!((q[0] - 0.5).abs() < 0.02, "boundary split {q:?}");
        assert!((q[1] - 0.5).abs() < 0.02, "boundary split {q:?}");
    }

    #[test]
    fn coarse_grid_rejected() {
        let spec = ResonatorSpec::fig5(1.0);
        let grid = QuadratureGrid {
            n_radial: 4,
            n_angular: 4,
            r_max: spec.lobe_radius() + 4.0,
        };
        assert!(matches!(
            lobe_basin_projectors(&spec, &grid),
            Err(Error::GridTooCoarse(_))
        ));
    }
}
