//! Metastable-manifold detection from a Liouvillian spectrum.
//!
//! A wide gap in the decay rates splits the modes into a slow set, which
//! hosts long-lived phases, and a fast remainder. Probe states relaxed onto
//! the slow manifold and clustered by trace distance expose the phases; the
//! dual basis of the slow left eigenmatrices yields the classifying
//! operators P_mu with tr(P_mu rho_nu) ~ delta.

use crate::error::{Error, Result};
use crate::linalg::{self, dagger, eig_hermitian, eye, hermitize, inverse, matmul, CMat, C64};
use crate::quantum::{trace_distance_mat, DensityOperator};

use super::Spectrum;

#[derive(Debug, Clone)]
pub struct MetastableManifold {
    /// Number of slow modes (steady state included).
    pub n: usize,
    /// Relaxation time onto the manifold, -1/Re lambda_{n+1}.
    pub tau_s: f64,
    /// Time at which the manifold itself starts to decay, -1/Re lambda_n;
    /// infinite when the slow modes are exact zero modes.
    pub tau_f: f64,
    /// Rate ratio across the gap.
    pub gap_ratio: f64,
    pub phases: Vec<DensityOperator>,
    pub projectors: Vec<CMat>,
    /// Deviation of sum_mu P_mu from the identity.
    pub projector_sum_residual: f64,
    /// Largest anti-Hermitian part removed from any P_mu.
    pub hermiticity_defect: f64,
    /// crosstalk[mu][nu] = Re tr(P_mu rho_nu); ~identity for a clean manifold.
    pub crosstalk: Vec<Vec<f64>>,
    pub cluster_sizes: Vec<usize>,
}

/// One projector onto each basis state; a reasonable default probe set for
/// systems without rotational symmetry.
pub fn basis_probes(dim: usize) -> Vec<DensityOperator> {
    (0..dim).map(|i| DensityOperator::basis(dim, i)).collect()
}

#[derive(Debug, Clone, Copy)]
pub struct SpectralGap {
    pub n: usize,
    pub tau_s: f64,
    pub tau_f: f64,
    pub gap_ratio: f64,
}

/// Largest-index split of the decay rates whose ratio exceeds the
/// threshold. Gaps below exactly conserved modes do not count; the split
/// must separate slow decay from fast decay.
pub fn locate_gap(spectrum: &Spectrum, gap_threshold: f64) -> Result<SpectralGap> {
    let rates: Vec<f64> = spectrum.eigenvalues.iter().map(|l| -l.re).collect();
    let max_rate = rates.iter().cloned().fold(0.0f64, f64::max);
    if max_rate <= 0.0 {
        return Err(Error::NoGapFound(gap_threshold));
    }
    let floor = 1e-12 * max_rate;
    let mut n = 0usize;
    for m in 1..rates.len() {
        if rates[m - 1] > floor && rates[m] / rates[m - 1] > gap_threshold {
            n = m;
        }
    }
    if n == 0 {
        return Err(Error::NoGapFound(gap_threshold));
    }
    let tau_s = 1.0 / rates[n];
    let tau_f = if rates[n - 1] > floor {
        1.0 / rates[n - 1]
    } else {
        f64::INFINITY
    };
    let gap_ratio = rates[n] / rates[n - 1].max(floor);
    Ok(SpectralGap {
        n,
        tau_s,
        tau_f,
        gap_ratio,
    })
}

/// Locate the slow manifold behind the spectral gap, then extract its
/// phases from the given probe states.
pub fn detect_metastable_manifold(
    spectrum: &Spectrum,
    gap_threshold: f64,
    probes: &[DensityOperator],
) -> Result<MetastableManifold> {
    let gap = locate_gap(spectrum, gap_threshold)?;
    let SpectralGap {
        n,
        tau_s,
        tau_f,
        gap_ratio,
    } = gap;

    if probes.len() < n {
        return Err(Error::Invalid(format!(
            "{} probes cannot resolve a manifold of {} phases",
            probes.len(),
            n
        )));
    }
    for p in probes {
        if p.dim() != spectrum.dim() {
            return Err(Error::DimensionMismatch {
                expected: spectrum.dim(),
                got: p.dim(),
                context: "metastable probe".into(),
            });
        }
    }

    // Project every probe onto the slow manifold, a hair past the fast
    // relaxation time.
    let t_measure = 3.0 * tau_s;
    let relaxed: Vec<CMat> = probes
        .iter()
        .map(|p| hermitize(&spectrum.reconstruct_partial(p.mat(), t_measure, n)))
        .collect();

    let (clusters, cluster_sizes) = single_linkage(&relaxed, n);
    let dim = spectrum.dim();
    let mut phases = Vec::with_capacity(n);
    let mut means = Vec::with_capacity(n);
    for members in &clusters {
        let mut mean = CMat::zeros((dim, dim));
        for &i in members {
            mean = &mean + &relaxed[i];
        }
        mean.mapv_inplace(|z| z / C64::new(members.len() as f64, 0.0));
        means.push(mean.clone());
        phases.push(project_to_state(&mean)?);
    }
    for a in 0..n {
        for b in (a + 1)..n {
            if trace_distance_mat(&means[a], &means[b]) < 1e-6 {
                return Err(Error::Invalid(
                    "probes relaxed onto coinciding phases; supply probes that \
                     populate each basin"
                        .into(),
                ));
            }
        }
    }

    // Dual basis: G_{k nu} = tr(L_k^dag rho_nu), B = G^{-1},
    // P_mu = sum_k B_{mu k} L_k^dag.
    let mut g = CMat::zeros((n, n));
    for k in 0..n {
        for (nu, phase) in phases.iter().enumerate() {
            g[(k, nu)] = spectrum.coefficient(k, phase.mat());
        }
    }
    let b = inverse(&g)?;
    let mut projectors = Vec::with_capacity(n);
    let mut hermiticity_defect = 0.0f64;
    for mu in 0..n {
        let mut p = CMat::zeros((dim, dim));
        for k in 0..n {
            p = &p + &(&dagger(spectrum.left(k)) * b[(mu, k)]);
        }
        let defect = linalg::max_abs(&(&p - &dagger(&p))) / 2.0;
        hermiticity_defect = hermiticity_defect.max(defect);
        projectors.push(hermitize(&p));
    }

    let mut sum = CMat::zeros((dim, dim));
    for p in &projectors {
        sum = &sum + p;
    }
    let projector_sum_residual = linalg::max_abs(&(&sum - &eye(dim)));

    let crosstalk: Vec<Vec<f64>> = projectors
        .iter()
        .map(|p| {
            phases
                .iter()
                .map(|rho| linalg::trace(&matmul(p, rho.mat())).re)
                .collect()
        })
        .collect();

    Ok(MetastableManifold {
        n,
        tau_s,
        tau_f,
        gap_ratio,
        phases,
        projectors,
        projector_sum_residual,
        hermiticity_defect,
        crosstalk,
        cluster_sizes,
    })
}

/// Agglomerative single-linkage clustering down to `target` clusters,
/// deterministic under ties (first pair in scan order wins).
fn single_linkage(items: &[CMat], target: usize) -> (Vec<Vec<usize>>, Vec<usize>) {
    let m = items.len();
    let mut dist = vec![vec![0.0f64; m]; m];
    for a in 0..m {
        for b in (a + 1)..m {
            let d = trace_distance_mat(&items[a], &items[b]);
            dist[a][b] = d;
            dist[b][a] = d;
        }
    }
    let mut clusters: Vec<Vec<usize>> = (0..m).map(|i| vec![i]).collect();
    while clusters.len() > target {
        let mut best = (0usize, 1usize, f64::INFINITY);
        for a in 0..clusters.len() {
            for b in (a + 1)..clusters.len() {
                let mut d = f64::INFINITY;
                for &i in &clusters[a] {
                    for &j in &clusters[b] {
                        d = d.min(dist[i][j]);
                    }
                }
                if d < best.2 {
                    best = (a, b, d);
                }
            }
        }
        let moved = clusters.remove(best.1);
        clusters[best.0].extend(moved);
    }
    let sizes = clusters.iter().map(|c| c.len()).collect();
    (clusters, sizes)
}

/// Closest density operator: clamp negative eigenvalues, renormalize.
pub(crate) fn project_to_state(mat: &CMat) -> Result<DensityOperator> {
    let h = hermitize(mat);
    let (vals, vecs) = eig_hermitian(&h)?;
    let dim = h.nrows();
    let mut out = CMat::zeros((dim, dim));
    let mut total = 0.0;
    for (k, &v) in vals.iter().enumerate() {
        if v <= 0.0 {
            continue;
        }
        total += v;
        let col = vecs.column(k);
        for i in 0..dim {
            for j in 0..dim {
                out[(i, j)] += C64::new(v, 0.0) * col[i] * col[j].conj();
            }
        }
    }
    if total <= 0.0 {
        return Err(Error::NotAState("no positive weight left".into()));
    }
    out.mapv_inplace(|z| z / C64::new(total, 0.0));
    DensityOperator::with_tol(out, 1e-6)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::build_liouvillian;
    use crate::linalg::{CMat, ONE, ZERO};

    /// Three levels: |2> drains fast into |0> and |1>, which mix slowly.
    /// Strong dephasing between the wells keeps the slow manifold classical
    /// (two phases), otherwise the well coherences would be slow modes too.
    fn two_well(eps: f64) -> crate::lindblad::Liouvillian {
        let h = CMat::from_elem((3, 3), ZERO);
        let mut f02 = CMat::from_elem((3, 3), ZERO);
        f02[(0, 2)] = ONE;
        let mut f12 = CMat::from_elem((3, 3), ZERO);
        f12[(1, 2)] = ONE;
        let mut f01 = CMat::from_elem((3, 3), ZERO);
        f01[(0, 1)] = ONE;
        let mut f10 = CMat::from_elem((3, 3), ZERO);
        f10[(1, 0)] = ONE;
        let mut fz = CMat::from_elem((3, 3), ZERO);
        fz[(0, 0)] = ONE;
        fz[(1, 1)] = C64::new(-1.0, 0.0);
        build_liouvillian(
            h,
            vec![(1.0, f02), (1.0, f12), (eps, f01), (eps, f10), (1.0, fz)],
        )
        .unwrap()
    }

    #[test]
    fn two_well_manifold() {
        let lv = two_well(1e-4);
        let spec = lv.spectrum().unwrap();
        let probes = vec![DensityOperator::basis(3, 0), DensityOperator::basis(3, 1)];
        let m = detect_metastable_manifold(spec, 50.0, &probes).unwrap();
        assert_eq!(m.n, 2);
        assert!(m.gap_ratio > 1e3);
        assert!(m.tau_s <= 1.1 && m.tau_s > 0.2);
        assert!(m.tau_f > 1e3);
        assert_eq!(m.cluster_sizes, vec![1, 1]);
        // phases sit on the wells
        let p0 = m.phases[0].mat()[(0, 0)].re.max(m.phases[0].mat()[(1, 1)].re);
        assert!(p0 > 0.99);
        for mu in 0..2 {
            for nu in 0..2 {
                let want = if mu == nu { 1.0 } else { 0.0 };
                assert!(
                    (m.crosstalk[mu][nu] - want).abs() < 0.01,
                    "crosstalk {mu}{nu} = {}",
                    m.crosstalk[mu][nu]
                );
            }
        }
        assert!(m.projector_sum_residual < 0.01);
        assert!(m.hermiticity_defect < 0.01);
    }

    #[test]
    fn no_gap_in_flat_spectrum() {
        // plain amplitude damping: rates 0, g/2, g/2, g have no wide gap
        let h = CMat::from_elem((2, 2), ZERO);
        let f = ndarray::array![[ZERO, ONE], [ZERO, ZERO]];
        let lv = build_liouvillian(h, vec![(1.0, f)]).unwrap();
        let spec = lv.spectrum().unwrap();
        let probes = basis_probes(2);
        assert!(matches!(
            detect_metastable_manifold(spec, 50.0, &probes),
            Err(Error::NoGapFound(_))
        ));
    }

    #[test]
    fn insufficient_probes_rejected() {
        let lv = two_well(1e-4);
        let spec = lv.spectrum().unwrap();
        let probes = vec![DensityOperator::basis(3, 0)];
        assert!(detect_metastable_manifold(spec, 50.0, &probes).is_err());
    }

    #[test]
    fn extra_probes_cluster_onto_wells() {
        let lv = two_well(1e-5);
        let spec = lv.spectrum().unwrap();
        // probe 2 relaxes onto the midpoint of the simplex; single linkage
        // still splits into two clusters
        let probes = basis_probes(3);
        let m = detect_metastable_manifold(spec, 50.0, &probes).unwrap();
        assert_eq!(m.n, 2);
        assert_eq!(m.cluster_sizes.iter().sum::<usize>(), 3);
    }
}
