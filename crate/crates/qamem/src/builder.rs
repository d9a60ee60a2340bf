//! Kraus-set construction for stored pattern families.
//!
//! Every memory is a block channel: each pattern keeps a stable block
//! (its support, or a shared decoherence-free block for non-orthogonal
//! families) and drains an attached decaying block into itself. The minimal
//! completion uses two stable-only operators with distinct coefficient
//! vectors plus one mixing operator per transferred amplitude.

use rand::Rng;

use crate::error::{Error, Result};
use crate::hilbert::{build_layout, BlockSpec, SpaceLayout};
use crate::linalg::{CMat, CVec, C64, ONE, ZERO};
use crate::quantum::{CptpReport, DensityOperator, KrausChannel};
use crate::rng::rng_from;

/// Decay coefficients for one basin: state `x` keeps amplitudes
/// `c_x^alpha` on the decaying diagonal, and transfers at rate
/// `kappa_x = 1 - sum_alpha |c_x^alpha|^2` per application.
#[derive(Debug, Clone)]
pub struct DecayProfile {
    coeffs: Vec<Vec<C64>>,
}

impl DecayProfile {
    /// Single-coefficient profile with the same rate on every state:
    /// c_x = sqrt(1 - kappa).
    pub fn uniform(kappa: f64, dim: usize) -> Result<Self> {
        if !(kappa > 0.0 && kappa <= 1.0) {
            return Err(Error::RateOutOfRange(kappa));
        }
        let c = C64::new((1.0 - kappa).sqrt(), 0.0);
        let per_state = if kappa < 1.0 { vec![c] } else { vec![] };
        Ok(DecayProfile {
            coeffs: vec![per_state; dim],
        })
    }

    pub fn from_coeffs(coeffs: Vec<Vec<C64>>) -> Result<Self> {
        for cs in &coeffs {
            let total: f64 = cs.iter().map(|c| c.norm_sqr()).sum();
            if total >= 1.0 {
                return Err(Error::RateOutOfRange(1.0 - total));
            }
        }
        Ok(DecayProfile { coeffs })
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn slots(&self) -> usize {
        self.coeffs.iter().map(|c| c.len()).max().unwrap_or(0)
    }

    pub fn coeff(&self, x: usize, slot: usize) -> C64 {
        self.coeffs[x].get(slot).copied().unwrap_or(ZERO)
    }

    /// Per-application transfer rate of state x into the stable block.
    pub fn kappa(&self, x: usize) -> f64 {
        1.0 - self.coeffs[x].iter().map(|c| c.norm_sqr()).sum::<f64>()
    }
}

/// Stable-only coefficient vectors of the minimal two-operator completion.
/// Unit k gets a = (cos theta_k, sin theta_k) with distinct angles from a
/// low-discrepancy sequence, so no two units share a coefficient vector and
/// all inter-unit coherences strictly contract.
#[derive(Debug, Clone)]
pub struct StableAmplitudes {
    angles: Vec<f64>,
}

impl StableAmplitudes {
    pub fn minimal(units: usize) -> Self {
        StableAmplitudes {
            angles: stable_angles(units),
        }
    }

    pub fn angle(&self, unit: usize) -> f64 {
        self.angles[unit]
    }

    pub fn amplitude(&self, unit: usize, op: usize) -> f64 {
        match op {
            0 => self.angles[unit].cos(),
            1 => self.angles[unit].sin(),
            _ => 0.0,
        }
    }
}

/// Deterministic distinct angles in (0, pi/2).
pub fn stable_angles(units: usize) -> Vec<f64> {
    const PHI_CONJ: f64 = 0.618_033_988_749_894_9;
    (0..units)
        .map(|k| {
            let frac = ((k + 1) as f64 * PHI_CONJ).fract();
            std::f64::consts::FRAC_PI_2 * frac
        })
        .collect()
}

#[derive(Debug, Clone)]
pub enum PatternEntry {
    /// Mutually orthogonal-support pattern: an arbitrary full-rank density
    /// operator on its own stable block.
    Orthogonal {
        name: String,
        rho: CMat,
        decay: DecayProfile,
    },
    /// A decoherence-free block shared by several pure patterns that need
    /// not be orthogonal to each other.
    DfsGroup {
        name: String,
        stable_dim: usize,
        patterns: Vec<DfsPattern>,
    },
}

#[derive(Debug, Clone)]
pub struct DfsPattern {
    pub name: String,
    pub psi: CVec,
    pub decay: DecayProfile,
}

#[derive(Debug, Clone, Default)]
pub struct PatternSet {
    entries: Vec<PatternEntry>,
}

impl PatternSet {
    pub fn new() -> Self {
        PatternSet::default()
    }

    pub fn push_orthogonal(
        &mut self,
        name: impl Into<String>,
        rho: CMat,
        decay: DecayProfile,
    ) -> &mut Self {
        self.entries.push(PatternEntry::Orthogonal {
            name: name.into(),
            rho,
            decay,
        });
        self
    }

    pub fn push_dfs_group(
        &mut self,
        name: impl Into<String>,
        stable_dim: usize,
        patterns: Vec<DfsPattern>,
    ) -> &mut Self {
        self.entries.push(PatternEntry::DfsGroup {
            name: name.into(),
            stable_dim,
            patterns,
        });
        self
    }

    pub fn entries(&self) -> &[PatternEntry] {
        &self.entries
    }

    /// Number of orthogonal-support patterns.
    pub fn count_orthogonal(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| matches!(e, PatternEntry::Orthogonal { .. }))
            .count()
    }

    /// Number of patterns living in shared blocks.
    pub fn count_dfs(&self) -> usize {
        self.entries
            .iter()
            .map(|e| match e {
                PatternEntry::DfsGroup { patterns, .. } => patterns.len(),
                _ => 0,
            })
            .sum()
    }

    pub fn total_dim(&self) -> usize {
        self.entries
            .iter()
            .map(|e| match e {
                PatternEntry::Orthogonal { rho, decay, .. } => rho.nrows() + decay.dim(),
                PatternEntry::DfsGroup {
                    stable_dim,
                    patterns,
                    ..
                } => stable_dim + patterns.iter().map(|p| p.decay.dim()).sum::<usize>(),
            })
            .sum()
    }

    /// Seeded random pattern set within a total-dimension budget; used for
    /// fuzzing the builder and the CPTP checks.
    pub fn random(seed: u64, max_total_dim: usize) -> Self {
        let mut rng = rng_from(seed);
        let mut set = PatternSet::new();
        let mut budget = max_total_dim.max(2);
        let mut idx = 0usize;
        while budget >= 2 {
            let make_dfs = budget >= 4 && rng.gen_bool(0.4);
            if make_dfs {
                let s = rng.gen_range(1..=3.min(budget - 1));
                let mut rem = budget - s;
                let n_pat = rng.gen_range(1..=2.min(rem));
                let mut patterns = Vec::new();
                for p in 0..n_pat {
                    if rem == 0 {
                        break;
                    }
                    let d = rng.gen_range(1..=2.min(rem));
                    rem -= d;
                    let kappa = rng.gen_range(0.2..=1.0);
                    patterns.push(DfsPattern {
                        name: format!("p{idx}-{p}"),
                        psi: random_unit_vec(&mut rng, s),
                        decay: DecayProfile::uniform(kappa, d).unwrap(),
                    });
                }
                if patterns.is_empty() {
                    break;
                }
                set.push_dfs_group(format!("g{idx}"), s, patterns);
                budget = rem;
            } else {
                let s = rng.gen_range(1..=2.min(budget - 1));
                let d = rng.gen_range(1..=2.min(budget - s));
                let kappa = rng.gen_range(0.2..=1.0);
                let decay = if kappa < 1.0 && rng.gen_bool(0.3) {
                    // split the leftover weight across two coefficients
                    let w: f64 = rng.gen_range(0.1..0.9);
                    let ph = C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
                    let c1 = C64::new(((1.0 - kappa) * w).sqrt(), 0.0);
                    let c2 = ph * ((1.0 - kappa) * (1.0 - w)).sqrt();
                    DecayProfile::from_coeffs(vec![vec![c1, c2]; d]).unwrap()
                } else {
                    DecayProfile::uniform(kappa, d).unwrap()
                };
                set.push_orthogonal(format!("p{idx}"), random_density(&mut rng, s), decay);
                budget -= s + d;
            }
            idx += 1;
            if rng.gen_bool(0.3) {
                break;
            }
        }
        if set.entries.is_empty() {
            set.push_orthogonal(
                "p0",
                ndarray::array![[ONE]],
                DecayProfile::uniform(0.5, 1).unwrap(),
            );
        }
        set
    }
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn random_unit_vec(rng: &mut impl Rng, n: usize) -> CVec {
    let mut v = CVec::from_shape_fn(n, |_| C64::new(gaussian(rng), gaussian(rng)));
    let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.mapv_inplace(|z| z / norm);
    v
}

fn random_density(rng: &mut impl Rng, n: usize) -> CMat {
    let g = CMat::from_shape_fn((n, n), |_| C64::new(gaussian(rng), gaussian(rng)));
    let mut rho = CMat::from_elem((n, n), ZERO);
    for i in 0..n {
        for j in 0..n {
            let mut acc = ZERO;
            for k in 0..n {
                acc += g[(i, k)] * g[(j, k)].conj();
            }
            rho[(i, j)] = acc;
        }
    }
    // keep comfortably full rank
    for i in 0..n {
        rho[(i, i)] += C64::new(0.05, 0.0);
    }
    let tr: f64 = rho.diag().iter().map(|z| z.re).sum();
    rho.mapv_inplace(|z| z / tr);
    rho
}

/// One stored pattern of an assembled memory.
#[derive(Debug, Clone)]
pub struct StoredPattern {
    pub name: String,
    /// Pattern state embedded in the full space.
    pub state: DensityOperator,
    pub stable_block: String,
    pub decay_block: String,
    /// Transfer rate per decaying basis state of the basin.
    pub kappas: Vec<f64>,
}

/// Assembled associative memory: the retrieval channel plus the stored
/// pattern metadata needed to validate it.
#[derive(Debug, Clone)]
pub struct QamSystem {
    pub channel: KrausChannel,
    pub patterns: Vec<StoredPattern>,
    pub set: PatternSet,
}

impl QamSystem {
    pub fn layout(&self) -> &SpaceLayout {
        self.channel.layout()
    }
}

/// Build a memory from mutually orthogonal patterns only.
pub fn build_orthogonal(set: &PatternSet) -> Result<QamSystem> {
    if set
        .entries
        .iter()
        .any(|e| !matches!(e, PatternEntry::Orthogonal { .. }))
    {
        return Err(Error::NotAPattern(
            "orthogonal builder got a shared-block entry".into(),
        ));
    }
    assemble(set)
}

/// Build a memory whose patterns live in shared decoherence-free blocks.
pub fn build_dfs(set: &PatternSet) -> Result<QamSystem> {
    if set
        .entries
        .iter()
        .any(|e| !matches!(e, PatternEntry::DfsGroup { .. }))
    {
        return Err(Error::NotAPattern(
            "shared-block builder got an orthogonal entry".into(),
        ));
    }
    assemble(set)
}

/// Build a memory from any mix of entries.
pub fn build_qam(set: &PatternSet) -> Result<QamSystem> {
    assemble(set)
}

fn assemble(set: &PatternSet) -> Result<QamSystem> {
    if set.entries.is_empty() {
        return Err(Error::NotAPattern("empty pattern set".into()));
    }

    // layout
    let mut specs = Vec::new();
    for entry in &set.entries {
        match entry {
            PatternEntry::Orthogonal { name, rho, decay } => {
                if decay.dim() == 0 {
                    return Err(Error::ZeroBasin(name.clone()));
                }
                specs.push(BlockSpec::stable(name.clone(), rho.nrows()));
                specs.push(BlockSpec::decaying(format!("{name}:d"), decay.dim()));
            }
            PatternEntry::DfsGroup {
                name,
                stable_dim,
                patterns,
            } => {
                if patterns.is_empty() {
                    return Err(Error::NotAPattern(format!("group '{name}' has no patterns")));
                }
                specs.push(BlockSpec::stable(name.clone(), *stable_dim));
                for p in patterns {
                    if p.decay.dim() == 0 {
                        return Err(Error::ZeroBasin(p.name.clone()));
                    }
                    specs.push(BlockSpec::decaying(format!("{}:d", p.name), p.decay.dim()));
                }
            }
        }
    }
    let layout = build_layout(specs)?;
    let n = layout.dim();

    // stable units: one per orthogonal pattern eigenvector, one per group
    let mut unit_count = 0usize;
    for entry in &set.entries {
        unit_count += match entry {
            PatternEntry::Orthogonal { rho, .. } => rho.nrows(),
            PatternEntry::DfsGroup { .. } => 1,
        };
    }
    let amps = StableAmplitudes::minimal(unit_count);

    let slots = set
        .entries
        .iter()
        .map(|e| match e {
            PatternEntry::Orthogonal { decay, .. } => decay.slots(),
            PatternEntry::DfsGroup { patterns, .. } => {
                patterns.iter().map(|p| p.decay.slots()).max().unwrap_or(0)
            }
        })
        .max()
        .unwrap_or(0);

    // two stable-only operators, plus dedicated operators for decay
    // coefficient slots beyond the two that ride along
    let n_carrier = 2 + slots.saturating_sub(2);
    let mut ops: Vec<CMat> = (0..n_carrier)
        .map(|_| CMat::from_elem((n, n), ZERO))
        .collect();

    let mut patterns_out: Vec<StoredPattern> = Vec::new();
    let mut mixing: Vec<CMat> = Vec::new();
    let mut unit = 0usize;

    for entry in &set.entries {
        match entry {
            PatternEntry::Orthogonal { name, rho, decay } => {
                let s_dim = rho.nrows();
                let (weights, basis) = pattern_eigensystem(name, rho)?;
                let sb = layout.block(name)?.clone();
                let db = layout.block(&format!("{name}:d"))?.clone();

                // stable parts of the two carrier operators
                for j in 0..s_dim
                {
                    for op_k in 0..2 {
                        let a = C64::new(amps.amplitude(unit + j, op_k), 0.0);
                        let col = basis.column(j);
                        for r in 0..s_dim {
                            for c in 0..s_dim {
                                ops[op_k][(sb.offset + r, sb.offset + c)] +=
                                    a * col[r] * col[c].conj();
                            }
                        }
                    }
                }
                // decay coefficients on the carrier diagonal
                for x in 0..decay.dim() {
                    for slot in 0..decay.coeffs[x].len() {
                        ops[carrier_index(slot)][(db.offset + x, db.offset + x)] +=
                            decay.coeff(x, slot);
                    }
                }
                // mixing operators, one per (eigenvector, decaying state)
                let mut kappas = Vec::with_capacity(decay.dim());
                for x in 0..decay.dim() {
                    let kx = decay.kappa(x);
                    kappas.push(kx);
                    for j in 0..s_dim {
                        let b = C64::new((weights[j] * kx).sqrt(), 0.0);
                        let mut k = CMat::from_elem((n, n), ZERO);
                        let col = basis.column(j);
                        for r in 0..s_dim {
                            k[(sb.offset + r, db.offset + x)] = b * col[r];
                        }
                        mixing.push(k);
                    }
                }

                patterns_out.push(StoredPattern {
                    name: name.clone(),
                    state: DensityOperator::new(layout.embed_op(name, rho)?)?,
                    stable_block: name.clone(),
                    decay_block: format!("{name}:d"),
                    kappas,
                });
                unit += s_dim;
            }
            PatternEntry::DfsGroup {
                name,
                stable_dim,
                patterns,
            } => {
                let sb = layout.block(name)?.clone();
                // the whole block shares one coefficient vector
                for op_k in 0..2 {
                    let a = C64::new(amps.amplitude(unit, op_k), 0.0);
                    for r in 0..*stable_dim {
                        ops[op_k][(sb.offset + r, sb.offset + r)] += a;
                    }
                }
                for p in patterns {
                    if p.psi.len() != *stable_dim {
                        return Err(Error::DimensionMismatch {
                            expected: *stable_dim,
                            got: p.psi.len(),
                            context: format!("pattern '{}'", p.name),
                        });
                    }
                    let norm2: f64 = p.psi.iter().map(|z| z.norm_sqr()).sum();
                    if norm2 <= 1e-12 {
                        return Err(Error::NotAPattern(format!("'{}' is null", p.name)));
                    }
                    let psi = p.psi.mapv(|z| z / C64::new(norm2.sqrt(), 0.0));
                    let db = layout.block(&format!("{}:d", p.name))?.clone();
                    for x in 0..p.decay.dim() {
                        for slot in 0..p.decay.coeffs[x].len() {
                            ops[carrier_index(slot)][(db.offset + x, db.offset + x)] +=
                                p.decay.coeff(x, slot);
                        }
                    }
                    let mut kappas = Vec::with_capacity(p.decay.dim());
                    for x in 0..p.decay.dim() {
                        let kx = p.decay.kappa(x);
                        kappas.push(kx);
                        let b = C64::new(kx.sqrt(), 0.0);
                        let mut k = CMat::from_elem((n, n), ZERO);
                        for r in 0..*stable_dim {
                            k[(sb.offset + r, db.offset + x)] = b * psi[r];
                        }
                        mixing.push(k);
                    }
                    patterns_out.push(StoredPattern {
                        name: p.name.clone(),
                        state: DensityOperator::from_pure(&layout.embed_vec(name, &psi)?)?,
                        stable_block: name.clone(),
                        decay_block: format!("{}:d", p.name),
                        kappas,
                    });
                }
                unit += 1;
            }
        }
    }

    ops.extend(mixing);
    let channel = KrausChannel::new(ops, layout)?;
    Ok(QamSystem {
        channel,
        patterns: patterns_out,
        set: set.clone(),
    })
}

/// Decay slot -> carrier operator index: slots 0 and 1 ride the two
/// stable-only operators; later slots get dedicated operators.
fn carrier_index(slot: usize) -> usize {
    slot
}

fn pattern_eigensystem(name: &str, rho: &CMat) -> Result<(Vec<f64>, CMat)> {
    if rho.nrows() != rho.ncols() {
        return Err(Error::NotAPattern(format!("'{name}' is not square")));
    }
    let herm = crate::linalg::max_abs(&(rho - &crate::linalg::dagger(rho)));
    if herm > 1e-9 {
        return Err(Error::NotAPattern(format!(
            "'{name}' not Hermitian (residual {herm:.3e})"
        )));
    }
    let tr = crate::linalg::trace(rho);
    if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
        return Err(Error::NotAPattern(format!("'{name}' trace {tr} != 1")));
    }
    let (vals, vecs) = crate::linalg::eig_hermitian(rho)?;
    if vals.iter().any(|&v| v < 1e-12) {
        return Err(Error::NotAPattern(format!(
            "'{name}' is rank deficient on its block"
        )));
    }
    Ok((vals, vecs))
}

/// Rank-one convenience family: pattern mu is the basis state |mu> with a
/// single decaying partner transferring at rate q_mu per application.
pub fn build_rank_one_pairs(qs: &[f64]) -> Result<QamSystem> {
    let mut set = PatternSet::new();
    for (i, &q) in qs.iter().enumerate() {
        set.push_orthogonal(
            format!("m{i}"),
            ndarray::array![[ONE]],
            DecayProfile::uniform(q, 1)?,
        );
    }
    build_orthogonal(&set)
}

/// Cyclic family with one shared two-dimensional stable block: pattern l is
/// the seed rotated l times by the diagonal M-th root generator, and basin l
/// collects the computational nodes congruent to l mod M.
#[derive(Debug, Clone)]
pub struct GusSystem {
    pub system: QamSystem,
    pub n_qubits: usize,
    pub m: usize,
    /// Generator of the cyclic pattern family on the stable block.
    pub generator: CMat,
    /// Global index of decaying node z (bit string value).
    pub node_index: Vec<usize>,
}

pub fn build_gus(n_qubits: usize, m: usize, psi: &CVec, kappa: f64) -> Result<GusSystem> {
    if psi.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: psi.len(),
            context: "cyclic seed state".into(),
        });
    }
    let n_nodes = 1usize << n_qubits;
    if m == 0 || m > n_nodes {
        return Err(Error::ZeroBasin(format!("m = {m} with {n_nodes} nodes")));
    }
    let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if norm2 <= 1e-12 {
        return Err(Error::NotAPattern("null seed".into()));
    }
    let psi0 = psi.mapv(|z| z / C64::new(norm2.sqrt(), 0.0));

    let mut patterns = Vec::with_capacity(m);
    for l in 0..m {
        let phase = C64::from_polar(1.0, std::f64::consts::TAU * l as f64 / m as f64);
        let psi_l = ndarray::array![psi0[0], psi0[1] * phase];
        let d_l = (n_nodes - l + m - 1) / m; // #{z < 2^n : z mod m = l}
        patterns.push(DfsPattern {
            name: format!("pattern-{l}"),
            psi: psi_l,
            decay: DecayProfile::uniform(kappa, d_l)?,
        });
    }
    let mut set = PatternSet::new();
    set.push_dfs_group("stable", 2, patterns);
    let system = build_dfs(&set)?;

    // node z sits at position z div m inside basin (z mod m)
    let mut node_index = vec![0usize; n_nodes];
    for z in 0..n_nodes {
        let block = system
            .layout()
            .block(&format!("pattern-{}:d", z % m))?
            .clone();
        node_index[z] = block.offset + z / m;
    }
    let w = C64::from_polar(1.0, std::f64::consts::TAU / m as f64);
    let generator = ndarray::array![[ONE, ZERO], [ZERO, w]];
    Ok(GusSystem {
        system,
        n_qubits,
        m,
        generator,
        node_index,
    })
}

/// Conditions checked by `validate_qam` for one stored pattern.
#[derive(Debug, Clone)]
pub struct PatternCheck {
    pub name: String,
    /// Trace-norm residual of the pattern under one application.
    pub fixed_point_residual: f64,
    /// Worst-case final trace distance to the pattern over retrievals
    /// started from each decaying basis state of its basin.
    pub basin_max_distance: f64,
    pub basin_iters_max: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct QamReport {
    pub cptp: CptpReport,
    pub patterns: Vec<PatternCheck>,
    /// Max overlap of any retrieved state with a foreign basin.
    pub cross_leakage_max: f64,
    /// Trace-norm residual of the uniform classical pattern mixture.
    pub mixture_invariance_residual: f64,
    pub passed: bool,
}

/// Check the defining memory conditions: patterns are fixed points, every
/// decaying basis state retrieves its own pattern, basins do not leak into
/// each other, and classical pattern mixtures stay put.
pub fn validate_qam(system: &QamSystem, tol: f64, max_iters: usize) -> Result<QamReport> {
    let channel = &system.channel;
    let layout = system.layout();
    let cptp = channel.check_cptp(tol);

    let kappa_min = system
        .patterns
        .iter()
        .flat_map(|p| p.kappas.iter().copied())
        .fold(1.0f64, f64::min);
    let iter_tol = tol * kappa_min.max(1e-3);

    let mut checks = Vec::new();
    let mut cross_leakage_max = 0.0f64;
    for (pi, pat) in system.patterns.iter().enumerate() {
        let fixed_point_residual = channel.check_fixed_point(&pat.state);
        let db = layout.block(&pat.decay_block)?.clone();
        let mut basin_max_distance = 0.0f64;
        let mut basin_iters_max = 0usize;
        let mut converged = true;
        for x in db.range() {
            let run = channel.iterate_to_fixed_point(
                &DensityOperator::basis(layout.dim(), x),
                iter_tol,
                max_iters,
            )?;
            converged &= run.converged;
            basin_iters_max = basin_iters_max.max(run.iterations);
            basin_max_distance = basin_max_distance.max(run.state.trace_distance(&pat.state));
            // leakage into any other pattern's blocks
            for (qi, other) in system.patterns.iter().enumerate() {
                if qi == pi || other.stable_block == pat.stable_block {
                    continue;
                }
                let p_other = layout
                    .projector_onto(&[other.stable_block.as_str(), other.decay_block.as_str()])?;
                let leak = run.state.expectation(&p_other).re;
                cross_leakage_max = cross_leakage_max.max(leak);
            }
        }
        checks.push(PatternCheck {
            name: pat.name.clone(),
            fixed_point_residual,
            basin_max_distance,
            basin_iters_max,
            converged,
        });
    }

    let mixture = DensityOperator::mixture(
        &system
            .patterns
            .iter()
            .map(|p| (1.0, p.state.clone()))
            .collect::<Vec<_>>(),
    )?;
    let mixture_invariance_residual = channel.check_fixed_point(&mixture);

    let loose = 10.0 * tol;
    let passed = cptp.is_cptp
        && checks.iter().all(|c| {
            c.converged && c.fixed_point_residual <= loose && c.basin_max_distance <= loose
        })
        && cross_leakage_max <= loose
        && mixture_invariance_residual <= loose;
    Ok(QamReport {
        cptp,
        patterns: checks,
        cross_leakage_max,
        mixture_invariance_residual,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rank_one_pair_channel_matches_hand_form() {
        // single pattern, q = 1: K_2 = |m><w| transfers in one step
        let sys = build_rank_one_pairs(&[1.0]).unwrap();
        assert_eq!(sys.channel.dim(), 2);
        let rho0 = DensityOperator::basis(2, 1);
        let out = sys.channel.apply(&rho0).unwrap();
        assert_abs_diff_eq!(out.mat()[(0, 0)].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn kraus_count_is_minimal() {
        // 2 patterns: s=(1,2), d=(1,2) -> 2 + 1*1 + 2*2 = 7 operators
        let mut set = PatternSet::new();
        set.push_orthogonal(
            "a",
            ndarray::array![[ONE]],
            DecayProfile::uniform(0.5, 1).unwrap(),
        );
        set.push_orthogonal(
            "b",
            ndarray::array![
                [C64::new(0.7, 0.0), ZERO],
                [ZERO, C64::new(0.3, 0.0)]
            ],
            DecayProfile::uniform(0.25, 2).unwrap(),
        );
        let sys = build_orthogonal(&set).unwrap();
        assert_eq!(sys.channel.ops().len(), 2 + 1 + 4);
        let rep = sys.channel.check_cptp(1e-10);
        assert!(rep.is_cptp, "{rep:?}");
    }

    #[test]
    fn validate_passes_for_mixed_set() {
        let set = PatternSet::random(11, 10);
        let sys = build_qam(&set).unwrap();
        let report = validate_qam(&sys, 1e-8, 2000).unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn rejects_rank_deficient_pattern() {
        let mut set = PatternSet::new();
        set.push_orthogonal(
            "bad",
            ndarray::array![[ONE, ZERO], [ZERO, ZERO]],
            DecayProfile::uniform(0.5, 1).unwrap(),
        );
        assert!(matches!(
            build_orthogonal(&set),
            Err(Error::NotAPattern(_))
        ));
    }

    #[test]
    fn rejects_bad_rate() {
        assert!(matches!(
            DecayProfile::uniform(0.0, 1),
            Err(Error::RateOutOfRange(_))
        ));
        assert!(matches!(
            DecayProfile::uniform(1.5, 1),
            Err(Error::RateOutOfRange(_))
        ));
    }

    #[test]
    fn gus_basins_partition_nodes() {
        let psi = ndarray::array![ONE, ZERO];
        let gus = build_gus(3, 3, &psi, 0.5).unwrap();
        assert_eq!(gus.system.layout().dim(), 2 + 8);
        // basins have sizes 3,3,2 for residues 0,1,2
        let dims: Vec<usize> = (0..3)
            .map(|l| {
                gus.system
                    .layout()
                    .block(&format!("pattern-{l}:d"))
                    .unwrap()
                    .dim
            })
            .collect();
        assert_eq!(dims, vec![3, 3, 2]);
        let rep = gus.system.channel.check_cptp(1e-10);
        assert!(rep.is_cptp, "{rep:?}");
    }
}
