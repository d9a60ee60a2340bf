//! Dissipative quantum walk on the n-qubit hypercube.
//!
//! Nodes are bit-strings; stored patterns are a subset of them. Jump
//! operators hop a walker to any neighboring node that strictly reduces
//! its minimum Hamming distance to the pattern set, so every pattern is a
//! sink. A coherent part couples distance-1 neighbors among the non-pattern
//! nodes, with strength eta inside a basin of attraction and kappa across
//! basins.

use ndarray::Array2;

use crate::builder::{DecayProfile, PatternSet};
use crate::error::{Error, Result};
use crate::hilbert::{build_layout, BlockSpec, SpaceLayout};
use crate::lindblad::{build_liouvillian, Liouvillian};
use crate::linalg::{CMat, C64, ONE, ZERO};
use crate::quantum::DensityOperator;

#[derive(Debug, Clone)]
pub struct WalkSpec {
    pub n_qubits: usize,
    /// Stored bit-strings, most significant qubit first.
    pub patterns: Vec<String>,
    /// Dissipative hopping rate.
    pub gamma: f64,
    /// Coherent coupling inside a basin.
    pub eta: f64,
    /// Coherent coupling across basins (and to unassigned nodes).
    pub kappa: f64,
}

#[derive(Debug)]
pub struct WalkSystem {
    pub liouvillian: Liouvillian,
    pub layout: SpaceLayout,
    pub patterns: PatternSet,
    /// Basin index per node; pattern nodes map to their own basin, ties to
    /// None.
    pub basin_of: Vec<Option<usize>>,
    pub pattern_nodes: Vec<usize>,
    /// Node index at each layout position (stable blocks first, then the
    /// decaying blocks pattern by pattern, then unassigned nodes).
    pub node_order: Vec<usize>,
}

pub fn bit_string_index(s: &str, n_qubits: usize) -> Result<usize> {
    if s.len() != n_qubits || !s.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(Error::BadBitString(s.to_string()));
    }
    Ok(s.bytes().fold(0usize, |acc, b| (acc << 1) | (b - b'0') as usize))
}

pub fn index_bit_string(z: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .rev()
        .map(|b| if z >> b & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// |x><x| for a node given as a bit-string.
pub fn node_projector(n_qubits: usize, bit_string: &str) -> Result<CMat> {
    let z = bit_string_index(bit_string, n_qubits)?;
    let nn = 1usize << n_qubits;
    let mut p = Array2::from_elem((nn, nn), ZERO);
    p[(z, z)] = ONE;
    Ok(p)
}

/// sigma_z on the leading (most significant) qubit, identity on the rest.
pub fn leading_z(n_qubits: usize) -> CMat {
    let nn = 1usize << n_qubits;
    let mut m = Array2::from_elem((nn, nn), ZERO);
    for z in 0..nn {
        let sign = if z >> (n_qubits - 1) & 1 == 0 { 1.0 } else { -1.0 };
        m[(z, z)] = C64::new(sign, 0.0);
    }
    m
}

/// Collective spin of qubits 2..n (everything except the least significant
/// one): S = sum_i sigma_z^(i).
pub fn collective_z_tail(n_qubits: usize) -> CMat {
    let nn = 1usize << n_qubits;
    let mut m = Array2::from_elem((nn, nn), ZERO);
    for z in 0..nn {
        let mut s = 0.0;
        for b in 1..n_qubits {
            s += if z >> b & 1 == 0 { 1.0 } else { -1.0 };
        }
        m[(z, z)] = C64::new(s, 0.0);
    }
    m
}

pub fn build_walk(spec: &WalkSpec) -> Result<WalkSystem> {
    if spec.n_qubits == 0 {
        return Err(Error::Invalid("walk needs at least one qubit".into()));
    }
    for &rate in &[spec.gamma, spec.eta, spec.kappa] {
        if rate < 0.0 {
            return Err(Error::NegativeRate(rate));
        }
    }
    let n = spec.n_qubits;
    let nn = 1usize << n;
    let mut pattern_nodes = Vec::with_capacity(spec.patterns.len());
    for p in &spec.patterns {
        let z = bit_string_index(p, n)?;
        if pattern_nodes.contains(&z) {
            return Err(Error::DuplicatePattern(p.clone()));
        }
        pattern_nodes.push(z);
    }
    if pattern_nodes.is_empty() {
        return Err(Error::Invalid("walk needs at least one pattern".into()));
    }

    let dist = |z: usize| -> (u32, Option<usize>) {
        // (minimum Hamming distance, basin if the minimizer is unique)
        let mut best = u32::MAX;
        let mut who = None;
        for (mu, &x) in pattern_nodes.iter().enumerate() {
            let d = ((z ^ x) as u64).count_ones();
            if d < best {
                best = d;
                who = Some(mu);
            } else if d == best {
                who = None;
            }
        }
        (best, who)
    };

    let mut basin_of: Vec<Option<usize>> = Vec::with_capacity(nn);
    let mut min_dist = Vec::with_capacity(nn);
    for z in 0..nn {
        let (d, who) = dist(z);
        min_dist.push(d);
        basin_of.push(who);
    }

    // jumps: strictly downhill single-bit hops
    let mut jumps = Vec::new();
    if spec.gamma > 0.0 {
        for z in 0..nn {
            for b in 0..n {
                let w = z ^ (1 << b);
                if min_dist[w] < min_dist[z] {
                    let mut op = Array2::from_elem((nn, nn), ZERO);
                    op[(w, z)] = ONE;
                    jumps.push((spec.gamma, op));
                }
            }
        }
    }

    // Hamiltonian: eta self-energy on non-pattern nodes; distance-1
    // couplings among non-pattern nodes, eta within a basin, kappa
    // otherwise; pattern rows and columns stay empty.
    let mut h = Array2::from_elem((nn, nn), ZERO);
    let is_pattern = |z: usize| pattern_nodes.contains(&z);
    for z in 0..nn {
        if !is_pattern(z) {
            h[(z, z)] = C64::new(spec.eta, 0.0);
        }
    }
    for z in 0..nn {
        if is_pattern(z) {
            continue;
        }
        for b in 0..n {
            let w = z ^ (1 << b);
            if w <= z || is_pattern(w) {
                continue;
            }
            let same_basin = match (basin_of[z], basin_of[w]) {
                (Some(a), Some(bb)) => a == bb,
                _ => false,
            };
            let g = if same_basin { spec.eta } else { spec.kappa };
            h[(z, w)] = C64::new(g, 0.0);
            h[(w, z)] = C64::new(g, 0.0);
        }
    }

    let liouvillian = build_liouvillian(h, jumps)?;

    // layout + pattern set: one stable block per pattern, one decaying
    // block per basin, leftovers unassigned
    let mut basin_nodes: Vec<Vec<usize>> = vec![Vec::new(); pattern_nodes.len()];
    let mut unassigned = Vec::new();
    for z in 0..nn {
        if is_pattern(z) {
            continue;
        }
        match basin_of[z] {
            Some(mu) => basin_nodes[mu].push(z),
            None => unassigned.push(z),
        }
    }
    let mut blocks = Vec::new();
    let mut node_order = Vec::with_capacity(nn);
    for (mu, &x) in pattern_nodes.iter().enumerate() {
        blocks.push(BlockSpec::stable(&spec.patterns[mu], 1));
        node_order.push(x);
    }
    for (mu, nodes) in basin_nodes.iter().enumerate() {
        if !nodes.is_empty() {
            blocks.push(BlockSpec::decaying(&format!("{}:d", spec.patterns[mu]), nodes.len()));
            node_order.extend(nodes.iter().copied());
        }
    }
    if !unassigned.is_empty() {
        blocks.push(BlockSpec::decaying("unassigned", unassigned.len()));
        node_order.extend(unassigned.iter().copied());
    }
    let layout = build_layout(blocks)?;

    let mut patterns = PatternSet::new();
    for (mu, name) in spec.patterns.iter().enumerate() {
        let rho = Array2::from_elem((1, 1), ONE);
        let d = basin_nodes[mu].len();
        patterns.push_orthogonal(name, rho, DecayProfile::uniform(1.0, d)?);
    }

    Ok(WalkSystem {
        liouvillian,
        layout,
        patterns,
        basin_of,
        pattern_nodes,
        node_order,
    })
}

/// tr(P_x rho(t)) for each observable bit-string over a time grid.
pub fn walk_retrieval_curve(
    spec: &WalkSpec,
    initial: &str,
    observables: &[String],
    times: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let system = build_walk(spec)?;
    let n = spec.n_qubits;
    let nn = 1usize << n;
    let z0 = bit_string_index(initial, n)?;
    let rho0 = DensityOperator::basis(nn, z0);
    let states = system.liouvillian.evolve_grid(&rho0, times)?;
    let mut series = Vec::with_capacity(observables.len());
    for obs in observables {
        let zx = bit_string_index(obs, n)?;
        series.push(states.iter().map(|s| s.mat()[(zx, zx)].re).collect());
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::check_strong_symmetry;
    use crate::linalg::max_abs;

    fn fig4_spec(kappa: f64) -> WalkSpec {
        WalkSpec {
            n_qubits: 3,
            patterns: vec!["011".into(), "111".into()],
            gamma: 1.0,
            eta: 0.1,
            kappa,
        }
    }

    #[test]
    fn basins_match_worked_example() {
        let sys = build_walk(&fig4_spec(0.0)).unwrap();
        // D_1 = {000, 001, 010}, D_2 = {100, 101, 110}
        for z in [0usize, 1, 2] {
            assert_eq!(sys.basin_of[z], Some(0), "node {z}");
        }
        for z in [4usize, 5, 6] {
            assert_eq!(sys.basin_of[z], Some(1), "node {z}");
        }
        assert_eq!(sys.basin_of[3], Some(0));
        assert_eq!(sys.basin_of[7], Some(1));
        assert_eq!(sys.layout.block("011:d").unwrap().dim, 3);
        assert_eq!(sys.layout.block("111:d").unwrap().dim, 3);
    }

    #[test]
    fn pattern_coherences_form_dfs_at_kappa_zero() {
        let sys = build_walk(&fig4_spec(0.0)).unwrap();
        let mut cross = CMat::from_elem((8, 8), ZERO);
        cross[(3, 7)] = ONE;
        assert!(max_abs(&sys.liouvillian.apply_mat(&cross)) < 1e-14);
        // kappa > 0 does not touch pattern coherences either; only basins mix
        let sys2 = build_walk(&fig4_spec(0.5)).unwrap();
        assert!(max_abs(&sys2.liouvillian.apply_mat(&cross)) < 1e-14);
    }

    #[test]
    fn jump_count_from_corner() {
        let sys = build_walk(&fig4_spec(0.0)).unwrap();
        // from 000 only the moves to 001 and 010 reduce the distance
        let from_000: Vec<_> = sys
            .liouvillian
            .jumps()
            .iter()
            .filter(|(_, f)| (0..8).any(|w| f[(w, 0)] != ZERO))
            .collect();
        assert_eq!(from_000.len(), 2);
    }

    #[test]
    fn even_string_patterns_have_unique_partners() {
        // patterns: all strings with the least significant qubit at 0
        let spec = WalkSpec {
            n_qubits: 3,
            patterns: vec!["000".into(), "010".into(), "100".into(), "110".into()],
            gamma: 1.0,
            eta: 0.1,
            kappa: 0.0,
        };
        let sys = build_walk(&spec).unwrap();
        for odd in [1usize, 3, 5, 7] {
            let targets: Vec<usize> = sys
                .liouvillian
                .jumps()
                .iter()
                .filter_map(|(_, f)| (0..8).find(|&w| f[(w, odd)] != ZERO))
                .collect();
            assert_eq!(targets, vec![odd - 1], "odd node {odd}");
        }
        let s = collective_z_tail(3);
        let rep = check_strong_symmetry(&sys.liouvillian, &s, 1e-12);
        assert!(rep.conserved);
    }

    #[test]
    fn ties_stay_unassigned() {
        let spec = WalkSpec {
            n_qubits: 2,
            patterns: vec!["00".into(), "11".into()],
            gamma: 1.0,
            eta: 0.2,
            kappa: 0.3,
        };
        let sys = build_walk(&spec).unwrap();
        assert_eq!(sys.basin_of[1], None);
        assert_eq!(sys.basin_of[2], None);
        assert_eq!(sys.layout.block("unassigned").unwrap().dim, 2);
        // tied nodes hop toward both patterns
        let from_01: Vec<_> = sys
            .liouvillian
            .jumps()
            .iter()
            .filter(|(_, f)| (0..4).any(|w| f[(w, 1)] != ZERO))
            .collect();
        assert_eq!(from_01.len(), 2);
    }

    #[test]
    fn retrieval_from_pattern_is_flat() {
        let spec = fig4_spec(0.0);
        let series = walk_retrieval_curve(
            &spec,
            "011",
            &["011".to_string()],
            &[0.0, 1.0, 5.0, 20.0],
        )
        .unwrap();
        for v in &series[0] {
            assert!((v - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn bad_strings_rejected() {
        assert!(matches!(
            bit_string_index("01a", 3),
            Err(Error::BadBitString(_))
        ));
        assert!(matches!(
            bit_string_index("01", 3),
            Err(Error::BadBitString(_))
        ));
        let spec = WalkSpec {
            n_qubits: 2,
            patterns: vec!["01".into(), "01".into()],
            gamma: 1.0,
            eta: 0.0,
            kappa: 0.0,
        };
        assert!(matches!(
            build_walk(&spec),
            Err(Error::DuplicatePattern(_))
        ));
    }
}
