//! Heavyweight resonator checks that need the full Liouvillian spectrum at
//! the three-lobe working point shipped in the presets: steady-state lobe
//! mixture, the three-phase metastable manifold, and the gap location
//! feeding the classifier.

use std::sync::LazyLock;

use qamem::lindblad::{detect_metastable_manifold, locate_gap, Liouvillian};
use qamem::models::{build_resonator, coherent_state, ResonatorSpec};
use qamem::quantum::DensityOperator;

static SPEC: LazyLock<ResonatorSpec> = LazyLock::new(|| ResonatorSpec::fig5(1.0));
static WEAK: LazyLock<Liouvillian> = LazyLock::new(|| {
    let lv = build_resonator(&SPEC).unwrap();
    lv.spectrum().unwrap();
    lv
});

fn lobe_mixture() -> DensityOperator {
    let parts: Vec<(f64, DensityOperator)> = (0..SPEC.n)
        .map(|j| {
            let (psi, _) = coherent_state(SPEC.fock_dim, SPEC.lobe_amplitude(j));
            (1.0, DensityOperator::from_pure(&psi).unwrap())
        })
        .collect();
    DensityOperator::mixture(&parts).unwrap()
}

#[test]
fn steady_state_is_the_uniform_lobe_mixture() {
    let steady = WEAK.steady_state().unwrap();
    let f = steady.fidelity(&lobe_mixture()).unwrap();
    assert!(f > 0.95, "fidelity to the lobe mixture: {f}");
}

#[test]
fn three_lobes_form_the_slow_manifold() {
    let spectrum = WEAK.spectrum().unwrap();
    let gap = locate_gap(spectrum, 50.0).unwrap();
    assert_eq!(gap.n, 3, "expected one slow mode per lobe");
    assert!(gap.gap_ratio > 1e3, "gap ratio {}", gap.gap_ratio);
    assert!(gap.tau_f > 100.0 * gap.tau_s);

    let probes: Vec<DensityOperator> = (0..SPEC.n)
        .map(|j| {
            let (psi, _) = coherent_state(SPEC.fock_dim, SPEC.lobe_amplitude(j));
            DensityOperator::from_pure(&psi).unwrap()
        })
        .collect();
    let manifold = detect_metastable_manifold(spectrum, 50.0, &probes).unwrap();
    assert_eq!(manifold.phases.len(), 3);
    assert!(manifold.projector_sum_residual < 1e-6);
    assert!(manifold.hermiticity_defect < 1e-6);
    // each lobe probe lands on its own phase
    for mu in 0..3 {
        for nu in 0..3 {
            let want = if mu == nu { 1.0 } else { 0.0 };
            assert!(
                (manifold.crosstalk[mu][nu] - want).abs() < 0.05,
                "crosstalk[{mu}][{nu}] = {}",
                manifold.crosstalk[mu][nu]
            );
        }
    }
    // phases stay close to the coherent lobes they formed from
    for (phase, probe) in manifold.phases.iter().zip(probes.iter()) {
        let f = phase.fidelity(probe).unwrap();
        assert!(f > 0.9, "phase drifted: fidelity {f}");
    }
}
