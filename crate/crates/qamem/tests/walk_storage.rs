//! Storage-ceiling check for the hypercube walk: storing every even
//! bit-string as a pattern (half of all nodes), each odd string retrieves
//! its unique partner obtained by clearing the last bit, exhaustively for
//! up to four qubits, while the collective tail spin stays conserved.

use qamem::lindblad::check_strong_symmetry;
use qamem::models::{build_walk, collective_z_tail, index_bit_string, WalkSpec};
use qamem::quantum::DensityOperator;

fn even_string_spec(n: usize) -> WalkSpec {
    let patterns = (0..1usize << n)
        .filter(|z| z % 2 == 0)
        .map(|z| index_bit_string(z, n))
        .collect();
    WalkSpec {
        n_qubits: n,
        patterns,
        gamma: 1.0,
        eta: 0.1,
        kappa: 0.0,
    }
}

#[test]
fn half_of_all_strings_is_storable_and_retrieves_exactly() {
    for n in 2..=4usize {
        let spec = even_string_spec(n);
        let sys = build_walk(&spec).unwrap();
        let nn = 1usize << n;
        // warm the spectral cache once; every retrieval below reuses it
        sys.liouvillian.spectrum().unwrap();
        for odd in (1..nn).step_by(2) {
            let rho0 = DensityOperator::basis(nn, odd);
            let rho = sys.liouvillian.evolve(&rho0, 50.0).unwrap();
            let partner = odd - 1;
            let p = rho.mat()[(partner, partner)].re;
            assert!(
                p > 1.0 - 1e-6,
                "n={n}: {} -> {} reached {p}",
                index_bit_string(odd, n),
                index_bit_string(partner, n)
            );
        }
    }
}

#[test]
fn collective_tail_spin_is_a_strong_symmetry() {
    for n in 2..=4usize {
        let spec = even_string_spec(n);
        let sys = build_walk(&spec).unwrap();
        let s = collective_z_tail(n);
        let rep = check_strong_symmetry(&sys.liouvillian, &s, 1e-10);
        assert!(rep.conserved, "n={n}: {rep:?}");
    }
}

#[test]
fn one_extra_pattern_breaks_the_partner_structure() {
    // store one odd string on top of all even ones: its basin is itself,
    // and the former partner now has two closest patterns (a tie)
    let n = 3usize;
    let mut spec = even_string_spec(n);
    spec.patterns.push(index_bit_string(1, n));
    let sys = build_walk(&spec).unwrap();
    assert_eq!(sys.basin_of[1], Some(4));
    // node 3 = 011 is now distance 1 from patterns 010 and 001: unassigned
    assert_eq!(sys.basin_of[3], None);
}
