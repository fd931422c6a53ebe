//! Quantum-transition annealing: wave-function-weighted neighbour moves,
//! greedy descents and long random "tunnel" jumps.
//!
//! The wave function over the neighbourhood is replaced by the surrogate
//! amplitude `exp(-nu * cost(k))`; `nu` therefore acts as an inverse
//! temperature for the transitions and, multiplied by `t_max`, sets the
//! length of a tunnel trajectory. No wave function is ever estimated.

use crate::problems::Problem;
use crate::result::trace_stride;
use crate::sa::{reached, Progress};
use crate::{rng_from_seed, AnnealResult, Error, Result, SimRng};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Strict-improvement threshold for the greedy descent.
const IMPROVEMENT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QtsParams {
    pub nu: f64,
    /// Number of quantum transitions in the whole run.
    pub t_max: u64,
    /// Unproductive local optimizations tolerated before tunnelling.
    pub t_drill: u64,
    /// Unproductive transitions tolerated before a local optimization.
    pub t_loc: u64,
    #[serde(default)]
    pub seed: u64,
}

impl QtsParams {
    fn check(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::InvalidConfig(format!("nu = {} must be positive", self.nu)));
        }
        if self.t_max == 0 || self.t_drill == 0 || self.t_loc == 0 {
            return Err(Error::InvalidConfig("t_max, t_drill and t_loc must be at least 1".into()));
        }
        Ok(())
    }

    /// Random-walk length of a tunnel jump, `ceil(nu * t_max)`.
    pub fn tunnel_length(&self) -> u64 {
        (self.nu * self.t_max as f64).ceil() as u64
    }
}

/// Selection probabilities over `problem.neighbors(config)`, proportional to
/// `exp(-nu * cost(k))`. Returns the moves with their probabilities.
pub fn transition_probabilities<P: Problem>(
    problem: &P,
    config: &P::Config,
    nu: f64,
) -> Result<(Vec<P::Move>, Vec<f64>)> {
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::InvalidParameter(format!("nu = {nu} must be non-negative")));
    }
    let moves = problem.neighbors(config);
    if moves.is_empty() {
        return Err(Error::NoMove);
    }
    let deltas: Vec<f64> = moves.iter().map(|&m| problem.delta(config, m)).collect();
    Ok((moves, weights(&deltas, nu)))
}

fn weights(deltas: &[f64], nu: f64) -> Vec<f64> {
    let lo = deltas.iter().copied().fold(f64::INFINITY, f64::min);
    let mut w: Vec<f64> = deltas.iter().map(|d| (-nu * (d - lo)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= z);
    w
}

fn pick<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// One quantum transition: samples a neighbour by surrogate amplitude and
/// returns it together with its cost change.
pub fn quantum_transition<P: Problem, R: Rng + ?Sized>(
    problem: &P,
    config: &P::Config,
    nu: f64,
    rng: &mut R,
) -> Result<(P::Move, f64)> {
    let (moves, probs) = transition_probabilities(problem, config, nu)?;
    let k = pick(&probs, rng);
    Ok((moves[k], problem.delta(config, moves[k])))
}

/// First-improvement descent to a local minimum of the neighbourhood.
/// Returns the total cost change and the number of move evaluations.
pub fn local_optimization<P: Problem>(problem: &P, config: &mut P::Config) -> (f64, u64) {
    let mut total = 0.0;
    let mut evals = 0;
    'descent: loop {
        for mv in problem.neighbors(config) {
            evals += 1;
            let d = problem.delta(config, mv);
            if d < -IMPROVEMENT_EPS {
                problem.apply(config, mv);
                total += d;
                continue 'descent;
            }
        }
        return (total, evals);
    }
}

/// Cost-blind random walk of `ceil(nu * t_max)` uniform neighbour steps.
/// Returns the accumulated cost change.
pub fn tunnel_jump<P: Problem, R: Rng + ?Sized>(
    problem: &P,
    config: &mut P::Config,
    nu: f64,
    t_max: u64,
    rng: &mut R,
) -> Result<f64> {
    let length = (nu * t_max as f64).ceil();
    if !(length >= 1.0) || !nu.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "tunnel trajectory length nu * t_max = {} must be positive",
            nu * t_max as f64
        )));
    }
    let mut total = 0.0;
    for _ in 0..length as u64 {
        let moves = problem.neighbors(config);
        if moves.is_empty() {
            break;
        }
        let mv = moves[rng.random_range(0..moves.len())];
        total += problem.delta(config, mv);
        problem.apply(config, mv);
    }
    Ok(total)
}

/// Runs from a random initial configuration.
pub fn qts_anneal<P: Problem>(problem: &P, params: &QtsParams) -> Result<AnnealResult<P::Config>> {
    params.check()?;
    let mut rng = rng_from_seed(params.seed);
    let init = problem.random_config(&mut rng);
    run(problem, params, init, rng)
}

/// Runs from a caller-chosen initial configuration.
pub fn qts_anneal_from<P: Problem>(
    problem: &P,
    params: &QtsParams,
    init: P::Config,
) -> Result<AnnealResult<P::Config>> {
    params.check()?;
    problem.validate(&init)?;
    run(problem, params, init, rng_from_seed(params.seed))
}

/// The nested loops: transitions until `t_loc` of them fail to improve the
/// best cost, then a local optimization; after `t_drill` unproductive local
/// optimizations, a tunnel jump followed by another descent. Any
/// improvement resets both patience counters. `t` counts transitions.
fn run<P: Problem>(
    problem: &P,
    params: &QtsParams,
    mut eps: P::Config,
    mut rng: SimRng,
) -> Result<AnnealResult<P::Config>> {
    let nu = params.nu;
    let bound = problem.lower_bound();
    let stride = trace_stride(params.t_max);
    let mut cost = problem.cost(&eps);
    let mut progress = Progress::new(&eps, cost, 1);
    let mut jumps = 0;

    // true when the best cost improved
    let improve = |progress: &mut Progress<P::Config>, eps: &P::Config, cost: f64| {
        if cost < progress.best_cost {
            progress.best_cost = cost;
            progress.best_config.clone_from(eps);
            true
        } else {
            false
        }
    };

    let mut t = 0u64;
    'run: while t < params.t_max && !reached(bound, progress.best_cost) {
        let mut j = 0;
        loop {
            let mut i = 0;
            loop {
                let moves = problem.neighbors(&eps);
                if moves.is_empty() {
                    break 'run;
                }
                let deltas: Vec<f64> = moves.iter().map(|&m| problem.delta(&eps, m)).collect();
                progress.evaluations += moves.len() as u64;
                let k = pick(&weights(&deltas, nu), &mut rng);
                problem.apply(&mut eps, moves[k]);
                cost += deltas[k];
                progress.accepted += 1;
                if deltas[k] > 0.0 {
                    progress.uphill += 1;
                }
                t += 1;
                if t.is_multiple_of(stride) {
                    progress.record(t, cost, nu);
                }
                if improve(&mut progress, &eps, cost) {
                    i = 0;
                    j = 0;
                    if reached(bound, cost) {
                        break 'run;
                    }
                } else {
                    i += 1;
                }
                if i > params.t_loc || t >= params.t_max {
                    break;
                }
            }
            let (d, evals) = local_optimization(problem, &mut eps);
            cost += d;
            progress.evaluations += evals;
            if improve(&mut progress, &eps, cost) {
                j = 0;
                if reached(bound, cost) {
                    break 'run;
                }
            } else {
                j += 1;
            }
            if j >= params.t_drill || t >= params.t_max {
                break;
            }
        }
        if t >= params.t_max {
            break;
        }
        cost += tunnel_jump(problem, &mut eps, nu, params.t_max, &mut rng)?;
        jumps += 1;
        let (d, evals) = local_optimization(problem, &mut eps);
        cost += d;
        progress.evaluations += evals;
        improve(&mut progress, &eps, cost);
    }
    if progress.trace.last().is_none_or(|p| p.step != t) {
        progress.record(t, cost, nu);
    }
    let mut result = progress.finish();
    result.tunnel_jumps = jumps;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{BarrierLandscape, ChainSite, Coupling, IsingInstance, SpinConfiguration};

    fn ferro2() -> IsingInstance {
        IsingInstance::new(2, vec![Coupling { i: 0, j: 1, strength: 1.0 }], vec![0.0; 2]).unwrap()
    }

    #[test]
    fn weight_ratio_two_to_one() {
        let nu = 1.7;
        let land = BarrierLandscape::new(vec![0.0, 5.0, 2f64.ln() / nu]).unwrap();
        let (moves, p) = transition_probabilities(&land, &ChainSite(1), nu).unwrap();
        assert_eq!(moves.len(), 2);
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-12 && (p[1] - 1.0 / 3.0).abs() < 1e-12);
        let mut rng = rng_from_seed(1);
        let left =
            (0..10_000).filter(|_| quantum_transition(&land, &ChainSite(1), nu, &mut rng).unwrap().0 .0 == 0).count();
        assert!((left as f64 / 1e4 - 2.0 / 3.0).abs() < 0.02, "{left}");
    }

    #[test]
    fn zero_nu_is_uniform() {
        let land = BarrierLandscape::new(vec![0.0, 5.0, 100.0]).unwrap();
        let (_, p) = transition_probabilities(&land, &ChainSite(1), 0.0).unwrap();
        assert_eq!(p, vec![0.5, 0.5]);
    }

    #[test]
    fn descent_reaches_aligned_pair() {
        let inst = ferro2();
        let mut c = SpinConfiguration::new(vec![1, -1]).unwrap();
        let (d, _) = local_optimization(&inst, &mut c);
        assert_eq!(d, -2.0);
        assert_eq!(inst.cost(&c), -1.0);
        let before = c.clone();
        assert_eq!(local_optimization(&inst, &mut c).0, 0.0);
        assert_eq!(c, before);
    }

    #[test]
    fn tunnel_needs_positive_length() {
        let land = BarrierLandscape::new(vec![0.0; 5]).unwrap();
        let mut rng = rng_from_seed(0);
        assert!(tunnel_jump(&land, &mut ChainSite(2), 0.0, 100, &mut rng).is_err());
        assert!(tunnel_jump(&land, &mut ChainSite(2), 1e-6, 100, &mut rng).is_ok());
    }

    #[test]
    fn ferromagnet_ground() {
        let p = QtsParams { nu: 1.0, t_max: 50, t_drill: 2, t_loc: 3, seed: 2 };
        let r = qts_anneal(&ferro2(), &p).unwrap();
        assert_eq!(r.best_cost, -1.0);
        assert!(qts_anneal(&ferro2(), &QtsParams { nu: 0.0, ..p }).is_err());
    }
}
