//! Strict TOML schema for experiment configs: unknown keys are rejected,
//! complex amplitudes are written as [re, im] pairs, and stochastic
//! experiments must carry a master seed.

use serde::{Deserialize, Serialize};

use qamem::builder::{DecayProfile, DfsPattern, PatternSet};
use qamem::linalg::{CMat, CVec, C64};
use qamem::models::{ResonatorSpec, WalkSpec};

use crate::error::{CliResult, Failure};

pub type ComplexPair = [f64; 2];

pub fn complex(p: ComplexPair) -> C64 {
    C64::new(p[0], p[1])
}

pub fn state_vector(amps: &[ComplexPair]) -> CVec {
    CVec::from_vec(amps.iter().copied().map(complex).collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed; required whenever the experiment draws random numbers.
    #[serde(default)]
    pub seed: Option<u64>,
    pub model: Model,
    pub experiment: Experiment,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

impl ExperimentConfig {
    /// Cross-field checks that strict parsing alone cannot express.
    pub fn check(&self) -> CliResult<()> {
        if self.experiment.is_stochastic() && self.seed.is_none() {
            return Err(Failure::Config(format!(
                "experiment '{}' is stochastic and needs a top-level seed",
                self.experiment.name()
            )));
        }
        match &self.model {
            Model::Qam(m) => m.check()?,
            Model::Gus(m) => m.check()?,
            Model::Walk(m) => m.check()?,
            Model::Resonator(_) | Model::Hopfield(_) => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<String>,
}

pub fn parse_config(text: &str) -> CliResult<ExperimentConfig> {
    toml::from_str(text).map_err(|e| Failure::Config(e.to_string()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// Explicit or seeded-random pattern set for the block-channel builder.
    Qam(QamModel),
    /// Cyclic pattern family on n qubits with a shared two-dim stable block.
    Gus(GusModel),
    /// Dissipative walk on the n-qubit hypercube.
    Walk(WalkModel),
    /// Driven-dissipative resonator with an n-photon drive and loss.
    Resonator(ResonatorModel),
    /// Classical Hopfield baseline with the Hebbian rule.
    Hopfield(HopfieldModel),
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Qam(_) => "qam",
            Model::Gus(_) => "gus",
            Model::Walk(_) => "walk",
            Model::Resonator(_) => "resonator",
            Model::Hopfield(_) => "hopfield",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QamModel {
    #[serde(default)]
    pub orthogonal: Vec<OrthogonalPattern>,
    #[serde(default)]
    pub dfs: Vec<DfsGroup>,
    /// Seeded random set; mutually exclusive with the explicit lists.
    #[serde(default)]
    pub random: Option<RandomSet>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrthogonalPattern {
    pub name: String,
    /// Pure stable state as [re, im] pairs; its length sets the block size.
    pub state: Vec<ComplexPair>,
    /// Per-application transfer rate from the basin, in (0, 1].
    pub kappa: f64,
    pub decay_dim: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DfsGroup {
    pub name: String,
    pub stable_dim: usize,
    pub patterns: Vec<DfsMember>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DfsMember {
    pub name: String,
    /// Pure state on the group's stable block, as [re, im] pairs.
    pub state: Vec<ComplexPair>,
    pub kappa: f64,
    pub decay_dim: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSet {
    pub seed: u64,
    pub max_total_dim: usize,
}

impl QamModel {
    fn check(&self) -> CliResult<()> {
        let explicit = !self.orthogonal.is_empty() || !self.dfs.is_empty();
        match (&self.random, explicit) {
            (Some(_), true) => Err(Failure::Config(
                "qam model takes either a random set or explicit patterns, not both".into(),
            )),
            (None, false) => Err(Failure::Config("qam model declares no patterns".into())),
            _ => Ok(()),
        }
    }

    pub fn pattern_set(&self) -> CliResult<PatternSet> {
        self.check()?;
        if let Some(r) = &self.random {
            return Ok(PatternSet::random(r.seed, r.max_total_dim));
        }
        let mut set = PatternSet::new();
        for p in &self.orthogonal {
            set.push_orthogonal(&p.name, pure_density(&p.name, &p.state)?, decay(&p.name, p.kappa, p.decay_dim)?);
        }
        for g in &self.dfs {
            let mut members = Vec::with_capacity(g.patterns.len());
            for p in &g.patterns {
                if p.state.len() != g.stable_dim {
                    return Err(Failure::Config(format!(
                        "pattern '{}' has {} amplitudes on a {}-dim block",
                        p.name,
                        p.state.len(),
                        g.stable_dim
                    )));
                }
                members.push(DfsPattern {
                    name: p.name.clone(),
                    psi: unit_vector(&p.name, &p.state)?,
                    decay: decay(&p.name, p.kappa, p.decay_dim)?,
                });
            }
            set.push_dfs_group(&g.name, g.stable_dim, members);
        }
        Ok(set)
    }
}

fn decay(name: &str, kappa: f64, dim: usize) -> CliResult<DecayProfile> {
    DecayProfile::uniform(kappa, dim)
        .map_err(|e| Failure::Config(format!("pattern '{name}': {e}")))
}

fn unit_vector(name: &str, amps: &[ComplexPair]) -> CliResult<CVec> {
    let v = state_vector(amps);
    let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if norm2 <= 1e-12 {
        return Err(Failure::Config(format!("pattern '{name}' has a null state")));
    }
    Ok(v.mapv(|z| z / C64::new(norm2.sqrt(), 0.0)))
}

fn pure_density(name: &str, amps: &[ComplexPair]) -> CliResult<CMat> {
    let v = unit_vector(name, amps)?;
    let d = v.len();
    let mut rho = CMat::from_elem((d, d), C64::new(0.0, 0.0));
    for i in 0..d {
        for j in 0..d {
            rho[(i, j)] = v[i] * v[j].conj();
        }
    }
    Ok(rho)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GusModel {
    pub n_qubits: usize,
    pub m: usize,
    pub kappa: f64,
    /// Qubit seed of the cyclic family; defaults to (|0> + |1>)/sqrt(2).
    #[serde(default)]
    pub seed_state: Option<Vec<ComplexPair>>,
}

impl GusModel {
    fn check(&self) -> CliResult<()> {
        if let Some(s) = &self.seed_state {
            if s.len() != 2 {
                return Err(Failure::Config(format!(
                    "gus seed_state needs 2 amplitudes, got {}",
                    s.len()
                )));
            }
        }
        Ok(())
    }

    pub fn seed_vec(&self) -> CliResult<CVec> {
        match &self.seed_state {
            Some(s) => unit_vector("gus seed", s),
            None => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                Ok(CVec::from_vec(vec![C64::new(h, 0.0), C64::new(h, 0.0)]))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkModel {
    pub n_qubits: usize,
    /// Stored bit strings, most significant qubit first.
    pub patterns: Vec<String>,
    pub gamma: f64,
    pub eta: f64,
    pub kappa: f64,
}

impl WalkModel {
    fn check(&self) -> CliResult<()> {
        if self.patterns.is_empty() {
            return Err(Failure::Config("walk model stores no patterns".into()));
        }
        Ok(())
    }

    pub fn spec(&self) -> WalkSpec {
        WalkSpec {
            n_qubits: self.n_qubits,
            patterns: self.patterns.clone(),
            gamma: self.gamma,
            eta: self.eta,
            kappa: self.kappa,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonatorModel {
    pub n: usize,
    pub delta: f64,
    pub eta: f64,
    #[serde(default)]
    pub theta0: f64,
    pub gamma1: f64,
    pub gamma_n: f64,
    pub fock_dim: usize,
}

impl ResonatorModel {
    pub fn spec(&self) -> ResonatorSpec {
        ResonatorSpec {
            n: self.n,
            delta: self.delta,
            eta: self.eta,
            theta0: self.theta0,
            gamma1: self.gamma1,
            gamma_n: self.gamma_n,
            fock_dim: self.fock_dim,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HopfieldModel {
    pub n_neurons: usize,
    pub m_patterns: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    /// Check the memory conditions of a built channel.
    Validate(ValidateParams),
    /// Channel models: iterate every decaying basis state to its pattern.
    /// Walk models: evolve an initial node and track pattern populations.
    Retrieve(RetrieveParams),
    /// Full Liouvillian eigendecomposition.
    Spectrum(SpectrumParams),
    /// Locate the spectral gap and extract the slow manifold.
    Metastable(MetastableParams),
    /// Resonator: classify noisy coherent inputs against the lobes.
    Classify(ClassifyParams),
    /// Exact storage-capacity report.
    Capacity(CapacityParams),
    /// Resonator, strong symmetry: cat run with a reset-to-vacuum error.
    Trajectory(TrajectoryParams),
    /// Monte Carlo retrieval rate of the classical baseline.
    Hopfield(HopfieldRunParams),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Validate(_) => "validate",
            Experiment::Retrieve(_) => "retrieve",
            Experiment::Spectrum(_) => "spectrum",
            Experiment::Metastable(_) => "metastable",
            Experiment::Classify(_) => "classify",
            Experiment::Capacity(_) => "capacity",
            Experiment::Trajectory(_) => "trajectory",
            Experiment::Hopfield(_) => "hopfield",
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(
            self,
            Experiment::Classify(_) | Experiment::Trajectory(_) | Experiment::Hopfield(_)
        )
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateParams {
    pub tolerance: Option<f64>,
    pub max_iterations: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RetrieveParams {
    /// Walk models: initial node as a bit string (required).
    pub initial: Option<String>,
    pub t_final: Option<f64>,
    pub n_times: Option<usize>,
    /// Walk models: bit strings to track; defaults to the stored patterns.
    pub observables: Option<Vec<String>>,
    /// Channel models: convergence tolerance and iteration cap.
    pub tolerance: Option<f64>,
    pub max_iterations: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumParams {
    /// How many slowest decay rates to list in the metrics (default 10).
    pub n_modes: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetastableParams {
    pub gap_threshold: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyParams {
    pub n_inputs: usize,
    /// Basin-overlap threshold for admitting an input.
    pub delta: f64,
    #[serde(default)]
    pub t_measure: Option<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub gap_threshold: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CapacityParams {
    /// Readout success probability for the classical capacity; models with
    /// an exact value (cyclic families, all-orthogonal sets) ignore it.
    pub p_succ: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryParams {
    pub t_reset: f64,
    pub t_final: f64,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub n_snapshots: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HopfieldRunParams {
    pub corrupt_frac: f64,
    pub trials: usize,
    #[serde(default)]
    pub max_sweeps: Option<usize>,
}
