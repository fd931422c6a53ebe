//! Property tests: incremental bookkeeping against full recomputation, and
//! symmetries every solver relies on.

use proptest::prelude::*;
use qanneal::problems::{
    barrier_landscape, planted_coloring_instance, random_ising, random_tsp, BarrierLandscape, BarrierProfile,
    BoxDomain, ChainSite, Coupling, CouplingDistribution, ExactOracle, GraphInstance, IsingInstance, Problem,
    Rastrigin, ReplicaCoupling, SpinConfiguration, Topology, TspInstance,
};
use qanneal::qts::{local_optimization, transition_probabilities, tunnel_jump};
use qanneal::rng_from_seed;
use qanneal::schedule::Schedule;
use qanneal::sqa::{replica_coupling, stack_energy, ReplicaStack};
use rand::seq::SliceRandom;

fn ising(seed: u64, n: usize) -> IsingInstance {
    random_ising(n, Topology::Complete, CouplingDistribution::Gaussian, &mut rng_from_seed(seed)).unwrap()
}

fn graph(seed: u64) -> GraphInstance {
    planted_coloring_instance(12, 3, 0.4, &mut rng_from_seed(seed)).unwrap().0
}

fn tsp(seed: u64) -> TspInstance {
    random_tsp(8, &mut rng_from_seed(seed)).unwrap()
}

fn rastrigin(_seed: u64) -> Rastrigin {
    Rastrigin::new(BoxDomain::rastrigin(3).unwrap(), 0.7).unwrap()
}

fn barrier(_seed: u64) -> BarrierLandscape {
    barrier_landscape(BarrierProfile::ThinTall, 3, 1, 4.0, 0.5).unwrap()
}

fn tol(a: f64) -> f64 {
    1e-9 * (1.0 + a.abs())
}

/// A random walk where every proposed move's delta must match the change of the full cost.
fn deltas_match<P: Problem>(problem: &P, seed: u64, steps: usize) -> Result<(), TestCaseError> {
    let mut rng = rng_from_seed(seed);
    let mut c = problem.random_config(&mut rng);
    for _ in 0..steps {
        let Some(mv) = problem.propose(&c, &mut rng) else { break };
        let before = problem.cost(&c);
        let d = problem.delta(&c, mv);
        problem.apply(&mut c, mv);
        let after = problem.cost(&c);
        prop_assert!((after - before - d).abs() <= tol(after), "{mv:?}: {before} -> {after}, delta {d}");
        prop_assert!(problem.validate(&c).is_ok());
    }
    // the deterministic neighbourhood too
    for mv in problem.neighbors(&c) {
        let mut next = c.clone();
        problem.apply(&mut next, mv);
        prop_assert!(
            (problem.cost(&next) - problem.cost(&c) - problem.delta(&c, mv)).abs() <= tol(problem.cost(&next))
        );
    }
    Ok(())
}

/// Stack energy change of a single-replica move equals `dpot / P + J_perp * kinetic_delta`.
fn stack_delta_matches<P: ReplicaCoupling>(problem: &P, seed: u64, replicas: usize) -> Result<(), TestCaseError> {
    let mut rng = rng_from_seed(seed);
    let (gamma, t) = (0.9, 0.4);
    let j = replica_coupling(gamma, t, replicas).unwrap();
    let mut stack = ReplicaStack::new((0..replicas).map(|_| problem.random_config(&mut rng)).collect()).unwrap();
    for step in 0..40 {
        let rho = step % replicas;
        let Some(mv) = problem.propose(&stack.replicas()[rho], &mut rng) else { continue };
        let before = stack_energy(problem, &stack, gamma, t).unwrap();
        let dpot = problem.delta(&stack.replicas()[rho], mv);
        let predicted =
            dpot / replicas as f64 + if replicas > 1 { j * stack.kinetic_delta(problem, rho, mv) } else { 0.0 };
        stack.apply(problem, rho, mv);
        let after = stack_energy(problem, &stack, gamma, t).unwrap();
        prop_assert!((after - before - predicted).abs() <= tol(after), "{before} -> {after}, predicted {predicted}");
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn incremental_deltas_agree_with_full_costs(seed in any::<u64>()) {
        deltas_match(&ising(seed, 9), seed, 200)?;
        deltas_match(&graph(seed), seed, 200)?;
        deltas_match(&tsp(seed), seed, 200)?;
        deltas_match(&rastrigin(seed), seed, 200)?;
        deltas_match(&barrier(seed), seed, 200)?;
    }

    #[test]
    fn stack_energy_deltas_agree_with_full_recomputation(seed in any::<u64>(), replicas in 1usize..6) {
        stack_delta_matches(&ising(seed, 6), seed, replicas)?;
        stack_delta_matches(&graph(seed), seed, replicas)?;
        stack_delta_matches(&tsp(seed), seed, replicas)?;
        stack_delta_matches(&rastrigin(seed), seed, replicas)?;
        stack_delta_matches(&barrier(seed), seed, replicas)?;
    }

    #[test]
    fn energy_matches_pairwise_sum(seed in any::<u64>(), index in 0usize..256) {
        let inst = ising(seed, 8);
        let c = SpinConfiguration::from_index(index, 8);
        let s = c.spins();
        let mut e = 0.0;
        for Coupling { i, j, strength } in inst.couplings() {
            e -= strength * f64::from(s[*i]) * f64::from(s[*j]);
        }
        for (h, si) in inst.fields().iter().zip(s) {
            e -= h * f64::from(*si);
        }
        prop_assert!((inst.energy(&c).unwrap() - e).abs() <= tol(e));
        prop_assert!((inst.energy_table().unwrap()[index] - e).abs() <= tol(e));
    }

    #[test]
    fn relabeling_spins_preserves_the_spectrum(seed in any::<u64>()) {
        let inst = ising(seed, 7);
        let mut perm: Vec<usize> = (0..7).collect();
        perm.shuffle(&mut rng_from_seed(seed ^ 1));
        let moved = inst.relabeled(&perm).unwrap();
        let a = inst.brute_force_optimum().unwrap();
        let b = moved.brute_force_optimum().unwrap();
        prop_assert!((a.cost - b.cost).abs() <= tol(a.cost));
        prop_assert_eq!(a.degeneracy, b.degeneracy);
        // a configuration and its relabeled image have equal energy
        let c = SpinConfiguration::from_index((seed % 128) as usize, 7);
        let mut image = vec![0i8; 7];
        for (i, &p) in perm.iter().enumerate() {
            image[p] = c.spins()[i];
        }
        let (e1, e2) = (inst.energy(&c).unwrap(), moved.energy(&SpinConfiguration::new(image).unwrap()).unwrap());
        prop_assert!((e1 - e2).abs() <= tol(e1));
    }

    #[test]
    fn global_spin_flip_is_a_symmetry_without_fields(seed in any::<u64>(), index in 0usize..512) {
        let inst = ising(seed, 9);
        let flipped = index ^ 0x1ff;
        let t = inst.energy_table().unwrap();
        prop_assert!((t[index] - t[flipped]).abs() <= tol(t[index]));
    }

    #[test]
    fn replica_coupling_is_positive_and_falls_with_gamma(
        t in 0.01f64..5.0,
        p in 2usize..64,
        g1 in 1e-3f64..10.0,
        g2 in 1e-3f64..10.0,
    ) {
        let (lo, hi) = if g1 < g2 { (g1, g2) } else { (g2, g1) };
        let (j_lo, j_hi) = (replica_coupling(lo, t, p).unwrap(), replica_coupling(hi, t, p).unwrap());
        prop_assert!(j_hi >= 0.0 && j_lo >= j_hi);
        // reference: -(T/2) ln tanh(gamma / (P T)), where it is numerically safe
        let x = lo / (p as f64 * t);
        if x < 10.0 {
            let reference = -0.5 * t * x.tanh().ln();
            prop_assert!((j_lo - reference).abs() <= 1e-10 * (1.0 + reference));
        }
    }

    #[test]
    fn schedules_decrease_to_their_floor(initial in 0.1f64..10.0, frac in 0.0f64..0.5, steps in 2u64..500) {
        let floor = initial * frac;
        for s in [
            Schedule::linear(initial, floor, steps).unwrap(),
            Schedule::geometric(initial, 0.97, floor, steps).unwrap(),
            Schedule::inverse_sqrt(initial, floor, steps).unwrap(),
        ] {
            let first = if s.value(0).is_ok() { 0 } else { 1 };
            let mut prev = f64::INFINITY;
            for t in first..=steps {
                let v = s.value(t).unwrap();
                prop_assert!(v <= prev + 1e-12 && v >= floor);
                prev = v;
            }
            prop_assert!(s.value(steps + 1).is_err());
        }
    }

    #[test]
    fn transition_weights_form_a_distribution(seed in any::<u64>(), nu in 0.0f64..3.0) {
        let inst = ising(seed, 8);
        let c = inst.random_config(&mut rng_from_seed(seed));
        let (moves, p) = transition_probabilities(&inst, &c, nu).unwrap();
        prop_assert_eq!(moves.len(), 8);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // higher weight for the lower-cost neighbour
        for a in 0..moves.len() {
            for b in 0..moves.len() {
                if inst.delta(&c, moves[a]) < inst.delta(&c, moves[b]) - 1e-12 && nu > 0.0 {
                    prop_assert!(p[a] > p[b]);
                }
            }
        }
    }

    #[test]
    fn local_optimization_never_raises_cost(seed in any::<u64>()) {
        let problem = ising(seed, 10);
        let mut c = problem.random_config(&mut rng_from_seed(seed));
        let before = problem.cost(&c);
        let (d, evals) = local_optimization(&problem, &mut c);
        prop_assert!(d <= 0.0 && evals >= 10);
        prop_assert!((problem.cost(&c) - before - d).abs() <= tol(before));
        prop_assert!(problem.neighbors(&c).iter().all(|&m| problem.delta(&c, m) >= -1e-12));
        let g = graph(seed);
        let mut c = g.random_config(&mut rng_from_seed(seed));
        let before = g.cost(&c);
        let (d, _) = local_optimization(&g, &mut c);
        prop_assert!((g.cost(&c) - before - d).abs() <= tol(before) && d <= 0.0);
    }
}

#[test]
fn tunnel_displacement_grows_with_nu() {
    // on a flat chain a tunnel is an unbiased walk of ceil(nu * t_max) steps
    let flat = BarrierLandscape::new(vec![0.0; 2001]).unwrap();
    let mut rng = rng_from_seed(77);
    let spread = |nu: f64, rng: &mut qanneal::SimRng| {
        let trials = 2000;
        let m2: f64 = (0..trials)
            .map(|_| {
                let mut site = ChainSite(1000);
                tunnel_jump(&flat, &mut site, nu, 100, rng).unwrap();
                (site.0 as f64 - 1000.0).powi(2)
            })
            .sum::<f64>()
            / trials as f64;
        m2
    };
    let v: Vec<f64> = [0.1, 0.4, 1.6].iter().map(|&nu| spread(nu, &mut rng)).collect();
    assert!(v[0] < v[1] && v[1] < v[2], "{v:?}");
    // unbiased walk: mean squared displacement equals the number of steps
    for (var, steps) in v.iter().zip([10.0, 40.0, 160.0]) {
        assert!((var / steps - 1.0).abs() < 0.15, "{var} vs {steps}");
    }
}
