//! Experiment dispatch: build the configured model, run the experiment and
//! collect the result bundle.

use serde_json::{json, Value};

use qamem::builder::{build_gus, build_qam, validate_qam, GusSystem, QamSystem};
use qamem::capacity::{
    capacity_of, classical_capacity_of, ratio_to_f64, Rational, SuccessProbability,
};
use qamem::lindblad::{basis_probes, detect_metastable_manifold, locate_gap, Liouvillian};
use qamem::linalg::{CMat, CVec, C64};
use qamem::models::{
    build_resonator, build_walk, cat_error_correction_run, coherent_state,
    lobe_classification_experiment, retrieval_success_rate, sample_retrieval,
    walk_retrieval_curve, ClassificationOptions,
};
use qamem::quantum::{square_root_measurement, DensityOperator};

use crate::config::{Experiment, ExperimentConfig, GusModel, Model};
use crate::error::{CliResult, Failure};
use crate::output::{ResultBundle, SeriesTable};

pub struct Overrides {
    pub threads: Option<usize>,
    pub tolerance: Option<f64>,
}

pub struct RunOutcome {
    pub bundle: ResultBundle,
    /// Set when the experiment ran to completion but its own acceptance
    /// gate failed; the bundle still gets written, then the process exits
    /// with code 2.
    pub failure: Option<Failure>,
}

pub fn run(config: &ExperimentConfig, over: &Overrides) -> CliResult<RunOutcome> {
    let mut bundle = ResultBundle::new(config, over.threads.unwrap_or(1));
    let mut failure = None;

    match (&config.model, &config.experiment) {
        (Model::Qam(_) | Model::Gus(_), Experiment::Validate(p)) => {
            let built = build_channel(&config.model)?;
            let tol = over.tolerance.or(p.tolerance).unwrap_or(1e-9);
            let iters = p.max_iterations.unwrap_or(4000);
            let report = validate_qam(built.system(), tol, iters)?;
            let c = &report.cptp;
            bundle.metric("tolerance", tol);
            bundle.metric("cptp_completeness_residual", c.completeness_residual);
            bundle.metric("cptp_block_structure_residual", c.block_structure_residual);
            bundle.metric("cptp_stable_residual", c.stable_residual);
            bundle.metric("cptp_cross_residual", c.cross_residual);
            bundle.metric("cptp_decay_residual", c.decay_residual);
            bundle.metric("is_cptp", c.is_cptp);
            bundle.metric("cross_leakage_max", report.cross_leakage_max);
            bundle.metric("mixture_invariance_residual", report.mixture_invariance_residual);
            bundle.metric("passed", report.passed);
            let patterns: Vec<Value> = report
                .patterns
                .iter()
                .map(|pc| {
                    json!({
                        "name": pc.name,
                        "fixed_point_residual": pc.fixed_point_residual,
                        "basin_max_distance": pc.basin_max_distance,
                        "basin_iters_max": pc.basin_iters_max,
                        "converged": pc.converged,
                    })
                })
                .collect();
            bundle.metric("patterns", patterns);
            if !report.passed {
                failure = Some(Failure::Run(
                    "memory validation failed; see results.json".into(),
                ));
            }
        }

        (Model::Qam(_) | Model::Gus(_), Experiment::Retrieve(p)) => {
            let built = build_channel(&config.model)?;
            let system = built.system();
            let tol = over.tolerance.or(p.tolerance).unwrap_or(1e-12);
            let iters = p.max_iterations.unwrap_or(10_000);
            let layout = system.layout();
            let mut rows = Vec::new();
            let mut worst = 0.0f64;
            let mut all_converged = true;
            for pat in &system.patterns {
                let db = layout.block(&pat.decay_block)?.clone();
                for x in db.range() {
                    let run = system.channel.iterate_to_fixed_point(
                        &DensityOperator::basis(layout.dim(), x),
                        tol,
                        iters,
                    )?;
                    let dist = run.state.trace_distance(&pat.state);
                    worst = worst.max(dist);
                    all_converged &= run.converged;
                    rows.push(vec![
                        pat.name.clone(),
                        format!("{x}"),
                        format!("{}", run.iterations),
                        format!("{}", run.converged),
                        format!("{dist}"),
                    ]);
                }
            }
            bundle.metric("initial_states", rows.len());
            bundle.metric("max_distance_to_pattern", worst);
            bundle.metric("all_converged", all_converged);
            bundle.series.push(SeriesTable::new(
                "retrieval",
                vec![
                    "pattern (name)".into(),
                    "initial_basis_state (global index)".into(),
                    "iterations (channel applications)".into(),
                    "converged (bool)".into(),
                    "distance_to_pattern (trace norm)".into(),
                ],
                rows,
            ));
        }

        (Model::Walk(w), Experiment::Retrieve(p)) => {
            let spec = w.spec();
            let initial = p.initial.as_deref().ok_or_else(|| {
                Failure::Config("walk retrieval needs an initial bit string".into())
            })?;
            let t_final = p.t_final.unwrap_or(50.0);
            let n_times = p.n_times.unwrap_or(201).max(2);
            let observables = p
                .observables
                .clone()
                .unwrap_or_else(|| spec.patterns.clone());
            let times = linspace(0.0, t_final, n_times);
            let series = walk_retrieval_curve(&spec, initial, &observables, &times)?;
            for (o, s) in observables.iter().zip(&series) {
                bundle.metric(&format!("final_pop_{o}"), *s.last().unwrap());
            }
            bundle.metric("t_final", t_final);
            let mut columns = vec!["time (1/gamma)".to_string()];
            columns.extend(observables.iter().map(|o| format!("pop_{o} (probability)")));
            let rows = times
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    let mut r = vec![*t];
                    r.extend(series.iter().map(|s| s[i]));
                    r
                })
                .collect();
            bundle
                .series
                .push(SeriesTable::numeric("retrieval_curve", columns, rows));
        }

        (Model::Walk(_) | Model::Resonator(_), Experiment::Spectrum(p)) => {
            let lv = liouvillian_of(&config.model)?;
            let sp = lv.spectrum()?;
            let n_modes = p.n_modes.unwrap_or(10).min(sp.eigenvalues.len());
            let rates: Vec<f64> = sp.eigenvalues.iter().map(|l| -l.re).collect();
            bundle.metric("dim", sp.dim());
            bundle.metric("modes", sp.eigenvalues.len());
            bundle.metric("biorthogonality_residual", sp.biorthogonality_residual);
            bundle.metric(
                "n_zero_modes",
                sp.zero_modes(over.tolerance.unwrap_or(1e-9)),
            );
            bundle.metric("slowest_rates", json!(&rates[..n_modes]));
            let rows = sp
                .eigenvalues
                .iter()
                .enumerate()
                .map(|(k, l)| vec![k as f64, l.re, l.im])
                .collect();
            bundle.series.push(SeriesTable::numeric(
                "spectrum",
                vec![
                    "mode (index, slow to fast)".into(),
                    "re_lambda (rate units)".into(),
                    "im_lambda (rate units)".into(),
                ],
                rows,
            ));
        }

        (Model::Walk(w), Experiment::Metastable(p)) => {
            let sys = build_walk(&w.spec())?;
            let probes = basis_probes(sys.liouvillian.dim());
            manifold_report(
                &mut bundle,
                &sys.liouvillian,
                p.gap_threshold.unwrap_or(50.0),
                &probes,
            )?;
        }

        (Model::Resonator(r), Experiment::Metastable(p)) => {
            let spec = r.spec();
            let lv = build_resonator(&spec)?;
            let probes = (0..spec.n)
                .map(|j| {
                    let (psi, _) = coherent_state(spec.fock_dim, spec.lobe_amplitude(j));
                    DensityOperator::from_pure(&psi)
                })
                .collect::<qamem::Result<Vec<_>>>()?;
            manifold_report(&mut bundle, &lv, p.gap_threshold.unwrap_or(50.0), &probes)?;
        }

        (Model::Resonator(r), Experiment::Classify(p)) => {
            let spec = r.spec();
            let lv = build_resonator(&spec)?;
            let mut opts = ClassificationOptions::new(p.n_inputs, p.delta, seed_of(config)?);
            opts.t_measure = p.t_measure;
            if let Some(dt) = p.dt {
                opts.dt = dt;
            }
            if let Some(g) = p.gap_threshold {
                opts.gap_threshold = g;
            }
            let report = lobe_classification_experiment(&spec, &lv, &opts)?;
            bundle.metric("n_inputs", report.n_inputs);
            bundle.metric("delta", report.delta);
            bundle.metric("t_measure", report.t_measure);
            bundle.metric("accuracy", report.accuracy);
            bundle.metric("correct", report.correct);
            bundle.metric("misclassified", report.misclassified);
            bundle.metric("unclassified", report.unclassified);
            bundle.metric("rejected_samples", report.rejected_samples);
            bundle.metric("confusion", json!(report.confusion));
            bundle.metric("per_class_total", json!(report.per_class_total));
        }

        (Model::Qam(_) | Model::Gus(_), Experiment::Capacity(p)) => {
            let built = build_channel(&config.model)?;
            let set = &built.system().set;
            let quantum = capacity_of(set)?;
            bundle.metric("n_total", quantum.n_total);
            bundle.metric("m_orthogonal", quantum.m_orthogonal);
            bundle.metric("m_shared", quantum.m_shared);
            bundle.metric("saturated", quantum.saturated);
            bundle.metric("alpha_q", ratio_json(quantum.alpha_q));

            let p_succ = match &built {
                // the square-root measurement on an equatorial cyclic family
                // succeeds with probability N_S / M exactly
                BuiltChannel::Gus(g, model) if equatorial(&model.seed_vec()?) => {
                    Some(SuccessProbability::Exact(Rational::new(2, g.m as i64)))
                }
                BuiltChannel::Gus(g, model) => {
                    let states = gus_states(&model.seed_vec()?, g.m);
                    let srm = square_root_measurement(&states, 1e-12)?;
                    Some(SuccessProbability::Approx(
                        srm.outcome_probabilities_pure(&states[0])[0],
                    ))
                }
                BuiltChannel::Plain(s) if s.set.count_dfs() == 0 => {
                    Some(SuccessProbability::Exact(Rational::new(1, 1)))
                }
                BuiltChannel::Plain(_) => p.p_succ.map(SuccessProbability::Approx),
            };
            if let Some(ps) = p_succ {
                let classical = classical_capacity_of(set, ps)?;
                bundle.metric(
                    "p_succ",
                    match ps {
                        SuccessProbability::Exact(r) => ratio_json(r),
                        SuccessProbability::Approx(v) => json!(v),
                    },
                );
                bundle.metric(
                    "alpha_qc",
                    classical.alpha_qc.map(ratio_json).unwrap_or(Value::Null),
                );
                bundle.metric("alpha_qc_value", classical.alpha_qc_f64);
                bundle.metric("alpha_qc_asymptotic_estimate", classical.asymptotic_estimate);
            }
            if let BuiltChannel::Gus(g, model) = &built {
                let states = gus_states(&model.seed_vec()?, g.m);
                let srm = square_root_measurement(&states, 1e-12)?;
                let success: Vec<f64> = states
                    .iter()
                    .enumerate()
                    .map(|(k, psi)| srm.outcome_probabilities_pure(psi)[k])
                    .collect();
                bundle.metric("srm_success", json!(success));
                bundle.metric(
                    "srm_success_min",
                    success.iter().cloned().fold(f64::INFINITY, f64::min),
                );
                let mut gram = CMat::zeros((g.m, g.m));
                for k in 0..g.m {
                    for l in 0..g.m {
                        gram[(k, l)] = states[k]
                            .iter()
                            .zip(states[l].iter())
                            .map(|(a, b)| a.conj() * b)
                            .sum();
                    }
                }
                bundle.matrix("gram", &gram);
            }
        }

        (Model::Resonator(r), Experiment::Trajectory(p)) => {
            let spec = r.spec();
            let lv = build_resonator(&spec)?;
            let dt = p.dt.unwrap_or(1e-3);
            let snaps = p.n_snapshots.unwrap_or(200);
            let report = cat_error_correction_run(
                &spec,
                &lv,
                p.t_reset,
                p.t_final,
                dt,
                snaps,
                seed_of(config)?,
            )?;
            let drift = report
                .sector0
                .iter()
                .map(|s| (s - report.sector0[0]).abs())
                .fold(0.0, f64::max);
            bundle.metric("reset_time", report.reset_time);
            bundle.metric("post_reset_overlap", report.post_reset_overlap);
            bundle.metric("final_overlap", *report.overlap.last().unwrap());
            bundle.metric("jump_count", report.jump_count);
            bundle.metric("sector0_drift_max", drift);
            let rows = report
                .times
                .iter()
                .zip(&report.overlap)
                .zip(&report.sector0)
                .map(|((t, o), s)| vec![*t, *o, *s])
                .collect();
            bundle.series.push(SeriesTable::numeric(
                "cat_run",
                vec![
                    "time (model units)".into(),
                    "overlap_cat0 (probability)".into(),
                    "sector0_population (probability)".into(),
                ],
                rows,
            ));
        }

        (Model::Hopfield(h), Experiment::Hopfield(p)) => {
            let sweeps = p.max_sweeps.unwrap_or(100);
            let seed = seed_of(config)?;
            let rate = retrieval_success_rate(
                h.n_neurons,
                h.m_patterns,
                p.corrupt_frac,
                p.trials,
                sweeps,
                seed,
            )?;
            let sample =
                sample_retrieval(h.n_neurons, h.m_patterns, p.corrupt_frac, sweeps, seed, 0)?;
            bundle.metric("n_neurons", h.n_neurons);
            bundle.metric("m_patterns", h.m_patterns);
            bundle.metric("trials", p.trials);
            bundle.metric("success_rate", rate);
            bundle.metric("sample_success", sample.success);
            bundle.metric("sample_sweeps", sample.trajectory.sweeps);
            bundle.metric("sample_converged", sample.trajectory.converged);
            let rows = sample
                .trajectory
                .energies
                .iter()
                .enumerate()
                .map(|(i, e)| vec![format!("{i}"), format!("{e}")])
                .collect();
            bundle.series.push(SeriesTable::new(
                "sample_energy",
                vec![
                    "update (single-spin flips)".into(),
                    "energy_scaled (coupling energy times n)".into(),
                ],
                rows,
            ));
        }

        (model, experiment) => {
            return Err(Failure::Config(format!(
                "experiment '{}' does not apply to model '{}'",
                experiment.name(),
                model.name()
            )));
        }
    }

    Ok(RunOutcome { bundle, failure })
}

enum BuiltChannel<'a> {
    Plain(QamSystem),
    Gus(GusSystem, &'a GusModel),
}

impl BuiltChannel<'_> {
    fn system(&self) -> &QamSystem {
        match self {
            BuiltChannel::Plain(s) => s,
            BuiltChannel::Gus(g, _) => &g.system,
        }
    }
}

fn build_channel(model: &Model) -> CliResult<BuiltChannel<'_>> {
    match model {
        Model::Qam(m) => Ok(BuiltChannel::Plain(build_qam(&m.pattern_set()?)?)),
        Model::Gus(g) => Ok(BuiltChannel::Gus(
            build_gus(g.n_qubits, g.m, &g.seed_vec()?, g.kappa)?,
            g,
        )),
        other => Err(Failure::Config(format!(
            "model '{}' does not build a retrieval channel",
            other.name()
        ))),
    }
}

fn liouvillian_of(model: &Model) -> CliResult<Liouvillian> {
    match model {
        Model::Walk(w) => Ok(build_walk(&w.spec())?.liouvillian),
        Model::Resonator(r) => Ok(build_resonator(&r.spec())?),
        other => Err(Failure::Config(format!(
            "model '{}' has no Liouvillian",
            other.name()
        ))),
    }
}

fn manifold_report(
    bundle: &mut ResultBundle,
    lv: &Liouvillian,
    threshold: f64,
    probes: &[DensityOperator],
) -> CliResult<()> {
    let sp = lv.spectrum()?;
    let gap = locate_gap(sp, threshold)?;
    bundle.metric("gap_threshold", threshold);
    bundle.metric("n_slow_modes", gap.n);
    bundle.metric("tau_s", gap.tau_s);
    bundle.metric("tau_f", finite(gap.tau_f));
    bundle.metric("gap_ratio", gap.gap_ratio);
    let m = detect_metastable_manifold(sp, threshold, probes)?;
    bundle.metric("projector_sum_residual", m.projector_sum_residual);
    bundle.metric("hermiticity_defect", m.hermiticity_defect);
    bundle.metric("cluster_sizes", json!(m.cluster_sizes));
    bundle.real_matrix("crosstalk", &m.crosstalk);
    Ok(())
}

/// Rotations of the seed by the M-th root generator, matching the stored
/// cyclic pattern family.
fn gus_states(psi0: &CVec, m: usize) -> Vec<CVec> {
    (0..m)
        .map(|l| {
            let phase = C64::from_polar(1.0, std::f64::consts::TAU * l as f64 / m as f64);
            CVec::from_vec(vec![psi0[0], psi0[1] * phase])
        })
        .collect()
}

fn equatorial(psi: &CVec) -> bool {
    (psi[0].norm_sqr() - psi[1].norm_sqr()).abs() < 1e-12
}

fn seed_of(config: &ExperimentConfig) -> CliResult<u64> {
    config
        .seed
        .ok_or_else(|| Failure::Config("missing seed".into()))
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

fn finite(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(v.to_string())
    }
}

fn ratio_json(r: Rational) -> Value {
    json!({ "num": *r.numer(), "den": *r.denom(), "value": ratio_to_f64(r) })
}
