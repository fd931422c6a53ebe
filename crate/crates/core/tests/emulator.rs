//! State-vector emulator against dense linear algebra and the adiabatic theorem.

use approx::assert_relative_eq;
use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;
use proptest::prelude::*;
use qanneal::aqc::{
    evolve, ground_state_probability, hamiltonian_apply, minimum_gap, AqcConfig, AqcSpec, QuantumState,
};
use qanneal::problems::{random_ising, Coupling, CouplingDistribution, IsingInstance, Topology};
use qanneal::rng_from_seed;
use qanneal::schedule::Schedule;
use rand::Rng;

/// Small instance with random couplings and fields, so the ground state is unique.
fn instance(seed: u64, n: usize) -> IsingInstance {
    let mut rng = rng_from_seed(seed);
    let base = random_ising(n, Topology::Complete, CouplingDistribution::Gaussian, &mut rng).unwrap();
    let fields = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    IsingInstance::new(n, base.couplings().to_vec(), fields).unwrap()
}

fn random_state(seed: u64, dim: usize) -> Vec<Complex64> {
    let mut rng = rng_from_seed(seed);
    let v: Vec<Complex64> =
        (0..dim).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / norm).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dense_and_matrix_free_agree(seed in any::<u64>(), n in 1usize..6, s in 0.0f64..=1.0) {
        let spec = AqcSpec::new(instance(seed, n), AqcConfig::interpolate(1.0, 0.1)).unwrap();
        let h = spec.dense_hamiltonian(s).unwrap();
        prop_assert!((&h - h.transpose()).abs().max() == 0.0);
        let psi = random_state(seed, 1 << n);
        let fast = hamiltonian_apply(&spec, s, &psi).unwrap();
        for (x, f) in fast.iter().enumerate() {
            let dense: Complex64 = (0..1 << n).map(|y| psi[y] * h[(x, y)]).sum();
            prop_assert!((dense - f).norm() < 1e-12);
        }
    }

    #[test]
    fn energy_expectation_lies_in_the_spectrum(seed in any::<u64>(), n in 1usize..6, s in 0.0f64..=1.0) {
        let spec = AqcSpec::new(instance(seed, n), AqcConfig::interpolate(1.0, 0.1)).unwrap();
        let eig = SymmetricEigen::new(spec.dense_hamiltonian(s).unwrap());
        let (lo, hi) = (eig.eigenvalues.min(), eig.eigenvalues.max());
        let psi = random_state(seed ^ 5, 1 << n);
        let hpsi = hamiltonian_apply(&spec, s, &psi).unwrap();
        let e: Complex64 = psi.iter().zip(&hpsi).map(|(a, b)| a.conj() * b).sum();
        prop_assert!(e.im.abs() < 1e-12);
        prop_assert!(e.re >= lo - 1e-9 && e.re <= hi + 1e-9);
    }
}

#[test]
fn driver_ground_state_is_uniform() {
    let spec = AqcSpec::new(instance(3, 4), AqcConfig::interpolate(1.0, 0.1)).unwrap();
    let uniform = QuantumState::uniform(4).unwrap();
    let h = hamiltonian_apply(&spec, 0.0, uniform.amplitudes()).unwrap();
    for (a, b) in h.iter().zip(uniform.amplitudes()) {
        assert!((a - b * -4.0).norm() < 1e-12);
    }
}

#[test]
fn slower_evolutions_end_closer_to_the_ground_state() {
    let inst = instance(12, 4);
    let probs: Vec<f64> = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0]
        .iter()
        .map(|&t| {
            evolve(&AqcSpec::new(inst.clone(), AqcConfig::interpolate(t, 0.01)).unwrap())
                .unwrap()
                .final_ground_probability()
        })
        .collect();
    // allow small non-adiabatic oscillations between neighbouring durations
    for w in probs.windows(2) {
        assert!(w[1] >= w[0] - 0.02, "{probs:?}");
    }
    assert!(probs[5] > 0.95 && probs[5] > probs[0] + 0.2, "{probs:?}");
}

#[test]
fn evolution_preserves_norm_and_reports_the_same_probability() {
    let inst = instance(5, 3);
    let ev = evolve(&AqcSpec::new(inst.clone(), AqcConfig::interpolate(10.0, 0.01)).unwrap()).unwrap();
    assert!(ev.max_norm_drift < 1e-6);
    let p = ground_state_probability(&ev.state, &inst).unwrap();
    assert_relative_eq!(p, ev.final_ground_probability(), epsilon = 1e-12);
    assert_relative_eq!(ev.trace.last().unwrap().t, 10.0, epsilon = 1e-12);
    assert!(ev.trace.len() <= 101 && ev.trace.len() >= 100);
}

#[test]
fn transverse_schedules_anneal_too() {
    let inst = instance(8, 3);
    let run = |kind: Schedule| {
        let cfg = AqcConfig::transverse(kind, 100.0, 0.002);
        evolve(&AqcSpec::new(inst.clone(), cfg).unwrap()).unwrap().final_ground_probability()
    };
    let slow = run(Schedule::inverse_sqrt(10.0, 0.0, 100).unwrap());
    let fast = run(Schedule::linear(10.0, 0.0, 1).unwrap());
    // inverse_sqrt leaves gamma = 1 at the end: the state is dressed, not classical
    assert!(slow > 0.5, "{slow}");
    assert!(fast < slow, "{fast} vs {slow}");
}

#[test]
fn gap_scan_converges_with_resolution() {
    let spec = AqcSpec::new(instance(21, 4), AqcConfig::interpolate(1.0, 0.1)).unwrap();
    let coarse = minimum_gap(&spec, 100).unwrap();
    let fine = minimum_gap(&spec, 2000).unwrap();
    assert!(fine.g_min <= coarse.g_min + 1e-12);
    assert!((fine.g_min - coarse.g_min).abs() < 1e-2 * (1.0 + fine.g_min));
    assert!((fine.s_star - coarse.s_star).abs() <= 0.02);
    assert_eq!(fine.curve.len(), 2001);
    for p in &fine.curve {
        assert!(p.gap >= -1e-12 && (p.e1 - p.e0 - p.gap).abs() < 1e-15);
    }
}

#[test]
fn gap_endpoints_match_closed_forms() {
    // s = 0: -sum X has gap 2; s = 1: the classical gap
    let inst = IsingInstance::new(2, vec![Coupling { i: 0, j: 1, strength: 1.0 }], vec![0.3, 0.0]).unwrap();
    let scan = minimum_gap(&AqcSpec::new(inst.clone(), AqcConfig::interpolate(1.0, 0.1)).unwrap(), 10).unwrap();
    assert_relative_eq!(scan.curve[0].gap, 2.0, epsilon = 1e-12);
    let mut levels = inst.energy_table().unwrap();
    levels.sort_by(f64::total_cmp);
    assert_relative_eq!(scan.curve[10].gap, levels[1] - levels[0], epsilon = 1e-12);
}

#[test]
fn zero_problem_closes_the_gap_at_the_end() {
    let inst = IsingInstance::from_fields(vec![0.0; 3]).unwrap();
    let scan = minimum_gap(&AqcSpec::new(inst, AqcConfig::interpolate(1.0, 0.1)).unwrap(), 50).unwrap();
    assert_eq!(scan.s_star, 1.0);
    assert!(scan.g_min.abs() < 1e-12);
    // the gap of -(1-s) sum X is 2 (1 - s)
    for p in &scan.curve {
        assert_relative_eq!(p.gap, 2.0 * (1.0 - p.s), epsilon = 1e-9);
    }
}

#[test]
fn ground_energy_matches_exact_diagonalization_at_the_end() {
    let inst = instance(31, 5);
    let scan = minimum_gap(&AqcSpec::new(inst.clone(), AqcConfig::interpolate(1.0, 0.1)).unwrap(), 4).unwrap();
    let table = DVector::from_vec(inst.energy_table().unwrap());
    assert_relative_eq!(scan.curve[4].e0, table.min(), epsilon = 1e-12);
}
