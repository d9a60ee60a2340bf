//! Monte Carlo wave-function unraveling of a Liouvillian.
//!
//! First-order scheme: propagate under the non-Hermitian effective
//! Hamiltonian, interpret the norm loss over a step as the jump
//! probability, and apply a jump operator drawn proportionally to
//! gamma_l * |F_l psi|^2 when one fires. Steps whose jump probability
//! exceeds the threshold are recursively halved.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{expm, matvec, CMat, CVec, C64};
use crate::rng::{derive_seed, rng_from};

use super::Liouvillian;

#[derive(Debug, Clone)]
pub struct TrajectoryOptions {
    pub t_final: f64,
    /// Upper bound on the integration step; the actual base step divides
    /// the snapshot spacing exactly.
    pub dt: f64,
    /// Number of recorded states, endpoints included.
    pub n_snapshots: usize,
    pub seed: u64,
    /// Jump probability above which a step is halved.
    pub jump_threshold: f64,
    pub max_halvings: u32,
}

impl TrajectoryOptions {
    pub fn new(t_final: f64, dt: f64, n_snapshots: usize, seed: u64) -> Self {
        TrajectoryOptions {
            t_final,
            dt,
            n_snapshots,
            seed,
            jump_threshold: 0.1,
            max_halvings: 20,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Normalized state at each snapshot time.
    pub states: Vec<CVec>,
    /// (time, jump channel index) for every jump that fired.
    pub jumps: Vec<(f64, usize)>,
    /// Smallest step the halving logic actually used.
    pub min_dt: f64,
}

struct Stepper<'a> {
    lv: &'a Liouvillian,
    heff: CMat,
    base_dt: f64,
    props: HashMap<u32, CMat>,
    threshold: f64,
    max_halvings: u32,
    min_dt: f64,
}

impl<'a> Stepper<'a> {
    fn ensure_propagator(&mut self, level: u32) -> Result<()> {
        if !self.props.contains_key(&level) {
            let dt = self.base_dt * 0.5f64.powi(level as i32);
            let u = expm(&(&self.heff * C64::new(0.0, -dt)))?;
            self.props.insert(level, u);
        }
        Ok(())
    }

    /// Advance `psi` by base_dt / 2^level, drawing jumps as needed.
    fn advance(
        &mut self,
        psi: &mut CVec,
        t: f64,
        level: u32,
        rng: &mut impl Rng,
        jumps: &mut Vec<(f64, usize)>,
    ) -> Result<()> {
        let dt = self.base_dt * 0.5f64.powi(level as i32);
        self.ensure_propagator(level)?;
        let drifted = matvec(self.props.get(&level).expect("cached"), psi);
        let kept: f64 = drifted.iter().map(|z| z.norm_sqr()).sum();
        let p_jump = 1.0 - kept;

        if p_jump > self.threshold {
            if level >= self.max_halvings {
                return Err(Error::StepTooLarge {
                    p: p_jump,
                    dt,
                    halvings: level,
                });
            }
            self.advance(psi, t, level + 1, rng, jumps)?;
            self.advance(psi, t + 0.5 * dt, level + 1, rng, jumps)?;
            return Ok(());
        }

        self.min_dt = self.min_dt.min(dt);
        if rng.gen::<f64>() < p_jump {
            // select a channel by gamma_l |F_l psi|^2 on the pre-step state
            let weights: Vec<f64> = self
                .lv
                .jumps()
                .iter()
                .map(|(rate, f)| rate * matvec(f, psi).iter().map(|z| z.norm_sqr()).sum::<f64>())
                .collect();
            let total: f64 = weights.iter().sum();
            if total <= 0.0 {
                return Err(Error::Invalid(
                    "jump fired but all channel weights vanish".into(),
                ));
            }
            let mut pick = rng.gen::<f64>() * total;
            let mut chosen = weights.len() - 1;
            for (l, w) in weights.iter().enumerate() {
                if pick < *w {
                    chosen = l;
                    break;
                }
                pick -= w;
            }
            let jumped = matvec(&self.lv.jumps()[chosen].1, psi);
            let norm = jumped.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm <= 0.0 {
                return Err(Error::Invalid("jump annihilated the state".into()));
            }
            *psi = jumped.mapv(|z| z / C64::new(norm, 0.0));
            jumps.push((t + dt, chosen));
        } else {
            let norm = kept.sqrt();
            *psi = drifted.mapv(|z| z / C64::new(norm, 0.0));
        }
        Ok(())
    }
}

pub fn trajectory(lv: &Liouvillian, psi0: &CVec, opts: &TrajectoryOptions) -> Result<Trajectory> {
    if psi0.len() != lv.dim() {
        return Err(Error::DimensionMismatch {
            expected: lv.dim(),
            got: psi0.len(),
            context: "trajectory initial state".into(),
        });
    }
    if !(opts.t_final > 0.0) || !(opts.dt > 0.0) || opts.n_snapshots < 2 {
        return Err(Error::Invalid(
            "trajectory needs t_final > 0, dt > 0 and at least two snapshots".into(),
        ));
    }
    let norm0 = psi0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm0 <= 0.0 {
        return Err(Error::NotAState("zero initial vector".into()));
    }
    let mut psi = psi0.mapv(|z| z / C64::new(norm0, 0.0));

    let segments = opts.n_snapshots - 1;
    let seg_t = opts.t_final / segments as f64;
    let steps_per_seg = (seg_t / opts.dt).ceil().max(1.0) as usize;
    let base_dt = seg_t / steps_per_seg as f64;

    let mut stepper = Stepper {
        lv,
        heff: lv.effective_hamiltonian(),
        base_dt,
        props: HashMap::new(),
        threshold: opts.jump_threshold,
        max_halvings: opts.max_halvings,
        min_dt: f64::INFINITY,
    };

    let mut rng = rng_from(opts.seed);
    let mut jumps = Vec::new();
    let mut times = Vec::with_capacity(opts.n_snapshots);
    let mut states = Vec::with_capacity(opts.n_snapshots);
    times.push(0.0);
    states.push(psi.clone());

    for seg in 0..segments {
        for step in 0..steps_per_seg {
            let t = (seg * steps_per_seg + step) as f64 * base_dt;
            stepper.advance(&mut psi, t, 0, &mut rng, &mut jumps)?;
        }
        times.push((seg + 1) as f64 * seg_t);
        states.push(psi.clone());
    }

    let min_dt = if stepper.min_dt.is_finite() {
        stepper.min_dt
    } else {
        base_dt
    };
    Ok(Trajectory {
        times,
        states,
        jumps,
        min_dt,
    })
}

/// Trajectory-averaged expectation values of Hermitian observables on the
/// snapshot grid. Trajectory i uses the stream seed derived from
/// (opts.seed, i), so results are independent of `threads`.
pub fn ensemble_expectations(
    lv: &Liouvillian,
    psi0: &CVec,
    opts: &TrajectoryOptions,
    n_traj: usize,
    observables: &[CMat],
    threads: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    if n_traj == 0 {
        return Err(Error::Invalid("ensemble needs at least one trajectory".into()));
    }
    let run_one = |i: usize| -> Result<Vec<Vec<f64>>> {
        let mut o = opts.clone();
        o.seed = derive_seed(opts.seed, i as u64);
        let traj = trajectory(lv, psi0, &o)?;
        let rows = observables
            .iter()
            .map(|obs| {
                traj.states
                    .iter()
                    .map(|s| {
                        let os = matvec(obs, s);
                        s.iter().zip(os.iter()).map(|(a, b)| (a.conj() * b).re).sum()
                    })
                    .collect::<Vec<f64>>()
            })
            .collect();
        Ok(rows)
    };

    let per_traj: Vec<Result<Vec<Vec<f64>>>> = if threads <= 1 {
        (0..n_traj).map(run_one).collect()
    } else {
        let mut slots: Vec<Option<Result<Vec<Vec<f64>>>>> = (0..n_traj).map(|_| None).collect();
        let chunk = n_traj.div_ceil(threads);
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for (c, slice) in slots.chunks_mut(chunk).enumerate() {
                let run = &run_one;
                handles.push(scope.spawn(move || {
                    for (off, slot) in slice.iter_mut().enumerate() {
                        *slot = Some(run(c * chunk + off));
                    }
                }));
            }
            for h in handles {
                h.join().expect("trajectory worker panicked");
            }
        });
        slots.into_iter().map(|s| s.expect("filled")).collect()
    };

    let n_snap = opts.n_snapshots;
    let mut mean = vec![vec![0.0f64; n_snap]; observables.len()];
    for rows in per_traj {
        let rows = rows?;
        for (acc, row) in mean.iter_mut().zip(rows.iter()) {
            for (a, v) in acc.iter_mut().zip(row.iter()) {
                *a += v;
            }
        }
    }
    let scale = 1.0 / n_traj as f64;
    for row in &mut mean {
        for v in row.iter_mut() {
            *v *= scale;
        }
    }
    let times: Vec<f64> = (0..n_snap)
        .map(|i| i as f64 * opts.t_final / (n_snap - 1) as f64)
        .collect();
    Ok((times, mean))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::build_liouvillian;
    use crate::linalg::{ONE, ZERO};
    use ndarray::array;

    fn damping(gamma: f64) -> Liouvillian {
        let h = CMat::from_elem((2, 2), ZERO);
        let f = array![[ZERO, ONE], [ZERO, ZERO]];
        build_liouvillian(h, vec![(gamma, f)]).unwrap()
    }

    #[test]
    fn deterministic_under_seed() {
        let lv = damping(1.0);
        let psi0 = array![ZERO, ONE];
        let opts = TrajectoryOptions::new(3.0, 0.01, 7, 42);
        let a = trajectory(&lv, &psi0, &opts).unwrap();
        let b = trajectory(&lv, &psi0, &opts).unwrap();
        assert_eq!(a.jumps, b.jumps);
        for (x, y) in a.states.iter().zip(b.states.iter()) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn ensemble_tracks_master_equation() {
        let lv = damping(1.0);
        let psi0 = array![ZERO, ONE];
        let opts = TrajectoryOptions::new(2.0, 0.005, 5, 7);
        let excited = array![[ZERO, ZERO], [ZERO, ONE]];
        let (times, series) =
            ensemble_expectations(&lv, &psi0, &opts, 600, &[excited], 1).unwrap();
        for (t, p) in times.iter().zip(series[0].iter()) {
            let exact = (-t).exp();
            assert!(
                (p - exact).abs() < 0.06,
                "t={t}: traj {p} vs exact {exact}"
            );
        }
    }

    #[test]
    fn free_evolution_never_jumps() {
        let h = array![[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]];
        let lv = build_liouvillian(h, vec![]).unwrap();
        let psi0 = array![
            C64::new(0.6, 0.0),
            C64::new(0.8, 0.0)
        ];
        let opts = TrajectoryOptions::new(1.0, 0.05, 3, 0);
        let traj = trajectory(&lv, &psi0, &opts).unwrap();
        assert!(traj.jumps.is_empty());
        let final_norm: f64 = traj.states[2].iter().map(|z| z.norm_sqr()).sum();
        assert!((final_norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oversized_step_errors_out() {
        let lv = damping(1e9);
        let psi0 = array![ZERO, ONE];
        let mut opts = TrajectoryOptions::new(1.0, 0.5, 3, 1);
        opts.max_halvings = 3;
        assert!(matches!(
            trajectory(&lv, &psi0, &opts),
            Err(Error::StepTooLarge { .. })
        ));
    }

    #[test]
    fn halving_engages_on_stiff_channel() {
        let lv = damping(30.0);
        let psi0 = array![ZERO, ONE];
        let opts = TrajectoryOptions::new(0.5, 0.025, 3, 11);
        let traj = trajectory(&lv, &psi0, &opts).unwrap();
        assert!(traj.min_dt < 0.025);
    }

    #[test]
    fn threaded_matches_sequential() {
        let lv = damping(1.0);
        let psi0 = array![ZERO, ONE];
        let opts = TrajectoryOptions::new(1.0, 0.01, 4, 3);
        let excited = array![[ZERO, ZERO], [ZERO, ONE]];
        let (_, seq) = ensemble_expectations(&lv, &psi0, &opts, 40, &[excited.clone()], 1).unwrap();
        let (_, par) = ensemble_expectations(&lv, &psi0, &opts, 40, &[excited], 4).unwrap();
        assert_eq!(seq, par);
    }
}
