//! Path-integral (Suzuki–Trotter) simulated quantum annealing.
//!
//! `P` replicas of the classical configuration form a periodic ring. Each
//! replica feels its own cost scaled by `1/P` plus a ferromagnetic coupling
//! to its two ring neighbours whose strength `J_perp` grows without bound as
//! the transverse field `gamma` is annealed towards zero. The temperature
//! stays fixed for the whole run.

use crate::problems::{GraphInstance, ReplicaCoupling};
use crate::result::trace_stride;
use crate::sa::{accept, reached, Progress};
use crate::schedule::Schedule;
use crate::{rng_from_seed, AnnealResult, Error, Result};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

/// Inter-replica coupling `-(T/2) ln tanh(gamma / (P T))`.
pub fn replica_coupling(gamma: f64, temperature: f64, replicas: usize) -> Result<f64> {
    if !(gamma > 0.0) || !(temperature > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "transverse field {gamma} and temperature {temperature} must be positive"
        )));
    }
    if replicas == 0 {
        return Err(Error::InvalidParameter("at least one replica is required".into()));
    }
    let x = gamma / (replicas as f64 * temperature);
    // ln tanh x = ln(1 - e^{-2x}) - ln(1 + e^{-2x}), stable for large x
    let e = (-2.0 * x).exp();
    Ok(-0.5 * temperature * ((-e).ln_1p() - e.ln_1p()))
}

/// A periodic ring of replicas of one problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicaStack<C> {
    replicas: Vec<C>,
}

impl<C: Clone> ReplicaStack<C> {
    pub fn new(replicas: Vec<C>) -> Result<Self> {
        if replicas.is_empty() {
            return Err(Error::InvalidParameter("a replica stack needs at least one replica".into()));
        }
        Ok(Self { replicas })
    }

    pub fn replicas(&self) -> &[C] {
        &self.replicas
    }

    pub fn len(&self) -> usize {
        self.replicas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.replicas.is_empty()
    }

    fn ring(&self, rho: usize) -> (usize, usize) {
        let p = self.replicas.len();
        ((rho + p - 1) % p, (rho + 1) % p)
    }

    /// Kinetic sum `sum_r coupling(w_r, w_{r+1})` over the ring, without `J_perp`.
    pub fn kinetic<P: ReplicaCoupling<Config = C>>(&self, problem: &P) -> f64 {
        let p = self.replicas.len();
        if p == 1 {
            return 0.0;
        }
        (0..p).map(|r| problem.coupling(&self.replicas[r], &self.replicas[(r + 1) % p])).sum()
    }

    /// Change of the kinetic sum when `mv` is applied to replica `rho`.
    pub fn kinetic_delta<P: ReplicaCoupling<Config = C>>(&self, problem: &P, rho: usize, mv: P::Move) -> f64 {
        if self.replicas.len() == 1 {
            return 0.0;
        }
        let (prev, next) = self.ring(rho);
        let w = &self.replicas[rho];
        problem.coupling_delta(w, mv, &self.replicas[prev]) + problem.coupling_delta(w, mv, &self.replicas[next])
    }

    pub fn apply<P: ReplicaCoupling<Config = C>>(&mut self, problem: &P, rho: usize, mv: P::Move) {
        problem.apply(&mut self.replicas[rho], mv);
    }
}

/// Stack energy `(1/P) sum cost(w_r) + J_perp * kinetic`; a single replica
/// has no kinetic term.
pub fn stack_energy<P: ReplicaCoupling>(
    problem: &P,
    stack: &ReplicaStack<P::Config>,
    gamma: f64,
    temperature: f64,
) -> Result<f64> {
    for r in stack.replicas() {
        problem.validate(r)?;
    }
    let p = stack.len();
    let potential = stack.replicas().iter().map(|r| problem.cost(r)).sum::<f64>() / p as f64;
    if p == 1 {
        return Ok(potential);
    }
    Ok(potential + replica_coupling(gamma, temperature, p)? * stack.kinetic(problem))
}

/// Replica annealer settings. `gamma.max_steps()` is the number of annealing
/// steps; each step sweeps every replica `M * N` times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqaParams {
    #[serde(rename = "P")]
    pub replicas: usize,
    #[serde(rename = "T")]
    pub temperature: f64,
    pub gamma: Schedule,
    #[serde(rename = "M", default = "one")]
    pub sweep_multiplier: usize,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> usize {
    1
}

impl SqaParams {
    fn check(&self) -> Result<()> {
        if self.replicas == 0 || self.sweep_multiplier == 0 {
            return Err(Error::InvalidConfig("P and M must be at least 1".into()));
        }
        if !(self.temperature > 0.0) {
            return Err(Error::InvalidConfig(format!("temperature {} must be positive", self.temperature)));
        }
        Ok(())
    }
}

/// Anneals `gamma` along its schedule at fixed temperature.
///
/// Each step visits the replicas in a freshly shuffled order. A move is
/// accepted outright if it lowers the replica's own cost, and otherwise by
/// the Metropolis rule on the change of the stack energy. The reported best
/// is the lowest single-replica cost seen; the run ends early once any
/// replica reaches the problem's lower bound.
///
/// With one replica the shuffle and the kinetic term drop out and the run
/// consumes randomness exactly like [`crate::sa::simulated_annealing`] at
/// constant temperature.
pub fn sqa_generic<P: ReplicaCoupling>(problem: &P, params: &SqaParams) -> Result<AnnealResult<P::Config>> {
    params.check()?;
    let p = params.replicas;
    let steps = params.gamma.max_steps();
    let moves = problem.size() * params.sweep_multiplier;
    if moves == 0 {
        return Err(Error::InvalidConfig("problem has no degrees of freedom".into()));
    }
    let bound = problem.lower_bound();
    let stride = trace_stride(steps);
    let t = params.temperature;

    let mut rng = rng_from_seed(params.seed);
    let mut stack = ReplicaStack::new((0..p).map(|_| problem.random_config(&mut rng)).collect())?;
    let mut costs: Vec<f64> = stack.replicas().iter().map(|r| problem.cost(r)).collect();
    let first = argmin(&costs);
    let mut progress = Progress::new(&stack.replicas()[first], costs[first], p as u64);
    if reached(bound, progress.best_cost) {
        progress.record(0, costs[first], params.gamma.value(0)?);
        return Ok(progress.finish());
    }

    let mut order: Vec<usize> = (0..p).collect();
    for step in 0..steps {
        let gamma = params.gamma.value(step)?;
        let j_perp = if p > 1 { replica_coupling(gamma, t, p)? } else { 0.0 };
        if p > 1 {
            order.shuffle(&mut rng);
        }
        let mut done = false;
        'replicas: for &rho in &order {
            for _ in 0..moves {
                let Some(mv) = problem.propose(&stack.replicas()[rho], &mut rng) else {
                    done = true;
                    break 'replicas;
                };
                progress.evaluations += 1;
                let dpot = problem.delta(&stack.replicas()[rho], mv);
                let dh = if p > 1 { dpot / p as f64 + j_perp * stack.kinetic_delta(problem, rho, mv) } else { dpot };
                if dpot < 0.0 || accept(dh, t, &mut rng) {
                    stack.apply(problem, rho, mv);
                    costs[rho] += dpot;
                    progress.accepted(dpot, &stack.replicas()[rho], costs[rho]);
                    if reached(bound, progress.best_cost) {
                        done = true;
                        break 'replicas;
                    }
                }
            }
        }
        if done || step % stride == 0 || step + 1 == steps {
            progress.record(step, costs[argmin(&costs)], gamma);
        }
        if done {
            break;
        }
    }
    Ok(progress.finish())
}

fn argmin(v: &[f64]) -> usize {
    v.iter().enumerate().fold(0, |best, (i, c)| if *c < v[best] { i } else { best })
}

/// Graph coloring by replica annealing: conflicted-vertex recolouring, stops
/// as soon as a proper coloring appears.
pub fn qa_col(
    graph: &GraphInstance,
    params: &SqaParams,
) -> Result<AnnealResult<crate::problems::ColoringConfiguration>> {
    if graph.k() < 2 {
        return Err(Error::InvalidParameter(format!("k = {} colors; need at least 2", graph.k())));
    }
    sqa_generic(graph, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{Coupling, IsingInstance, Problem, SpinConfiguration};

    #[test]
    fn coupling_reference_points() {
        // tanh(x) = e^-2  =>  J_perp = T
        let x = (-2f64).exp().atanh();
        let (t, p) = (0.7, 5);
        let j = replica_coupling(x * p as f64 * t, t, p).unwrap();
        assert!((j - t).abs() < 1e-12);
        assert!(replica_coupling(1e-300, 1.0, 1).unwrap() > 300.0);
        assert!(replica_coupling(0.0, 1.0, 1).is_err());
        assert!(replica_coupling(1.0, 0.0, 1).is_err());
        // large argument: tiny but positive
        let small = replica_coupling(40.0, 1.0, 1).unwrap();
        assert!(small > 0.0 && small < 1e-30);
    }

    #[test]
    fn single_replica_energy_is_the_cost() {
        let inst = IsingInstance::new(2, vec![Coupling { i: 0, j: 1, strength: 1.0 }], vec![0.0; 2]).unwrap();
        let s = ReplicaStack::new(vec![SpinConfiguration::new(vec![1, -1]).unwrap()]).unwrap();
        assert_eq!(stack_energy(&inst, &s, 1.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn identical_replicas_kinetic() {
        let n = 5;
        let inst = IsingInstance::new(n, vec![], vec![0.0; n]).unwrap();
        let c = SpinConfiguration::new(vec![1, -1, 1, 1, -1]).unwrap();
        let p = 4;
        let s = ReplicaStack::new(vec![c; p]).unwrap();
        let (g, t) = (0.8, 0.3);
        let j = replica_coupling(g, t, p).unwrap();
        let e = stack_energy(&inst, &s, g, t).unwrap();
        assert!((e - (-j * (p * n) as f64)).abs() < 1e-12);
    }

    #[test]
    fn ferromagnet_ground() {
        let inst = IsingInstance::new(2, vec![Coupling { i: 0, j: 1, strength: 1.0 }], vec![0.0; 2]).unwrap();
        let params = SqaParams {
            replicas: 8,
            temperature: 0.1,
            gamma: Schedule::linear(2.0, 0.0, 100).unwrap(),
            sweep_multiplier: 1,
            seed: 4,
        };
        let r = sqa_generic(&inst, &params).unwrap();
        assert_eq!(r.best_cost, -1.0);
        assert_eq!(inst.cost(&r.best_config), -1.0);
    }

    #[test]
    fn json_field_names() {
        let p: SqaParams =
            serde_json::from_str(r#"{"P":20,"T":0.2,"gamma":{"kind":"linear","initial":2.0,"max_steps":2000},"M":1}"#)
                .unwrap();
        assert_eq!(p.replicas, 20);
        assert_eq!(p.gamma.max_steps(), 2000);
    }
}
