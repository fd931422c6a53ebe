//! Metropolis simulated annealing and parallel tempering.

use crate::problems::Problem;
use crate::result::trace_stride;
use crate::schedule::Schedule;
use crate::{rng_from_seed, AnnealResult, Error, Result, SimRng, TracePoint};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Metropolis rule: downhill and level moves are always taken (without
/// consuming randomness); uphill moves with probability `exp(-delta / t)`.
pub fn metropolis_accept<R: Rng + ?Sized>(delta: f64, temperature: f64, rng: &mut R) -> Result<bool> {
    if !(temperature > 0.0) {
        return Err(Error::InvalidParameter(format!("temperature {temperature} must be positive")));
    }
    Ok(accept(delta, temperature, rng))
}

#[inline]
pub(crate) fn accept<R: Rng + ?Sized>(delta: f64, temperature: f64, rng: &mut R) -> bool {
    delta <= 0.0 || rng.random::<f64>() < (-delta / temperature).exp()
}

/// What happened on one Metropolis step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    Accepted(f64),
    Rejected,
    /// The configuration admits no move.
    Terminal,
}

/// A single Markov chain at a caller-supplied temperature.
#[derive(Debug, Clone)]
pub struct MetropolisChain<'a, P: Problem> {
    problem: &'a P,
    config: P::Config,
    cost: f64,
}

impl<'a, P: Problem> MetropolisChain<'a, P> {
    pub fn new(problem: &'a P, config: P::Config) -> Result<Self> {
        problem.validate(&config)?;
        let cost = problem.cost(&config);
        Ok(Self { problem, config, cost })
    }

    pub fn config(&self) -> &P::Config {
        &self.config
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    /// One proposal. `temperature` must be positive.
    pub fn step<R: Rng + ?Sized>(&mut self, temperature: f64, rng: &mut R) -> StepOutcome {
        let Some(mv) = self.problem.propose(&self.config, rng) else {
            return StepOutcome::Terminal;
        };
        let delta = self.problem.delta(&self.config, mv);
        if accept(delta, temperature, rng) {
            self.problem.apply(&mut self.config, mv);
            self.cost += delta;
            StepOutcome::Accepted(delta)
        } else {
            StepOutcome::Rejected
        }
    }
}

/// Simulated annealing settings; `moves_per_sweep` defaults to the problem size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaParams {
    pub schedule: Schedule,
    pub sweeps: u64,
    #[serde(default)]
    pub moves_per_sweep: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

pub(crate) fn resolve_moves(moves: Option<usize>, size: usize) -> Result<usize> {
    match moves.unwrap_or(size) {
        0 => Err(Error::InvalidConfig("moves per sweep must be at least 1".into())),
        m => Ok(m),
    }
}

pub(crate) fn reached(bound: Option<f64>, cost: f64) -> bool {
    bound.is_some_and(|b| cost <= b + 1e-9)
}

pub(crate) struct Progress<C> {
    pub best_config: C,
    pub best_cost: f64,
    pub trace: Vec<TracePoint>,
    pub accepted: u64,
    pub uphill: u64,
    pub evaluations: u64,
}

impl<C: Clone> Progress<C> {
    pub fn new(config: &C, cost: f64, evaluations: u64) -> Self {
        Self { best_config: config.clone(), best_cost: cost, trace: Vec::new(), accepted: 0, uphill: 0, evaluations }
    }

    #[inline]
    pub fn accepted(&mut self, delta: f64, config: &C, cost: f64) {
        self.accepted += 1;
        if delta > 0.0 {
            self.uphill += 1;
        }
        if cost < self.best_cost {
            self.best_cost = cost;
            self.best_config.clone_from(config);
        }
    }

    pub fn record(&mut self, step: u64, current: f64, control: f64) {
        self.trace.push(TracePoint { step, current, best: self.best_cost, control });
    }

    pub fn finish(self) -> AnnealResult<C> {
        AnnealResult {
            best_config: self.best_config,
            best_cost: self.best_cost,
            trace: self.trace,
            accepted_moves: self.accepted,
            uphill_accepted: self.uphill,
            evaluations: self.evaluations,
            tunnel_jumps: 0,
        }
    }
}

/// Runs `sweeps * moves_per_sweep` Metropolis proposals, with the temperature
/// of sweep `s` taken from `schedule.value(s)`.
///
/// Runs stop early if the problem's lower bound is reached. The trace holds
/// one point per sweep (subsampled for very long runs).
pub fn simulated_annealing<P: Problem>(problem: &P, params: &SaParams) -> Result<AnnealResult<P::Config>> {
    if params.sweeps == 0 {
        return Err(Error::InvalidConfig("sweeps must be at least 1".into()));
    }
    let moves = resolve_moves(params.moves_per_sweep, problem.size())?;
    let schedule = &params.schedule;
    let coldest = schedule.value((params.sweeps - 1).min(schedule.max_steps()))?;
    if !(coldest > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "temperature schedule reaches {coldest} within {} sweeps; it must stay positive",
            params.sweeps
        )));
    }
    let bound = problem.lower_bound();
    let stride = trace_stride(params.sweeps);

    let mut rng = rng_from_seed(params.seed);
    let start = problem.random_config(&mut rng);
    let mut chain = MetropolisChain::new(problem, start)?;
    let mut progress = Progress::new(chain.config(), chain.cost(), 1);
    if reached(bound, chain.cost()) {
        progress.record(0, chain.cost(), schedule.value(0)?);
        return Ok(progress.finish());
    }

    for sweep in 0..params.sweeps {
        let temperature = schedule.value(sweep.min(schedule.max_steps()))?;
        let mut done = false;
        for _ in 0..moves {
            match chain.step(temperature, &mut rng) {
                StepOutcome::Terminal => {
                    done = true;
                    break;
                }
                StepOutcome::Rejected => progress.evaluations += 1,
                StepOutcome::Accepted(delta) => {
                    progress.evaluations += 1;
                    progress.accepted(delta, chain.config(), chain.cost());
                    if reached(bound, progress.best_cost) {
                        done = true;
                        break;
                    }
                }
            }
        }
        if done || sweep % stride == 0 || sweep + 1 == params.sweeps {
            progress.record(sweep, chain.cost(), temperature);
        }
        if done {
            break;
        }
    }
    Ok(progress.finish())
}

/// Replica-exchange settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PtParams {
    /// Strictly ascending temperature ladder, at least two rungs.
    pub temperatures: Vec<f64>,
    pub sweeps: u64,
    #[serde(default = "default_swap_interval")]
    pub swap_interval: u64,
    #[serde(default)]
    pub moves_per_sweep: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

fn default_swap_interval() -> u64 {
    1
}

/// Geometric ladder of `count` temperatures from `t_min` to `t_max`.
pub fn geometric_ladder(t_min: f64, t_max: f64, count: usize) -> Result<Vec<f64>> {
    if count < 2 || !(t_min > 0.0 && t_max > t_min) {
        return Err(Error::InvalidParameter(format!("invalid ladder {t_min}..{t_max} x {count}")));
    }
    let r = (t_max / t_min).powf(1.0 / (count - 1) as f64);
    Ok((0..count).map(|i| t_min * r.powi(i as i32)).collect())
}

/// Probability of exchanging the configurations of chains at `t_i` and `t_j`
/// holding energies `e_i` and `e_j`.
pub fn swap_probability(t_i: f64, t_j: f64, e_i: f64, e_j: f64) -> f64 {
    ((1.0 / t_i - 1.0 / t_j) * (e_i - e_j)).exp().min(1.0)
}

/// Seed of the chain at ladder position `index`.
fn chain_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// One Metropolis chain per temperature; every `swap_interval` sweeps,
/// neighbouring chains attempt an exchange, coldest pair first.
///
/// Each chain draws from its own stream and the swap decisions from a
/// separate one, so chains could advance concurrently between swaps without
/// changing the result. The trace follows the coldest chain.
pub fn parallel_tempering<P: Problem>(problem: &P, params: &PtParams) -> Result<AnnealResult<P::Config>> {
    let temps = &params.temperatures;
    if temps.len() < 2 {
        return Err(Error::InvalidConfig("parallel tempering needs at least two temperatures".into()));
    }
    if temps[0] <= 0.0 || temps.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidConfig(format!("temperatures {temps:?} must be positive and strictly ascending")));
    }
    if params.sweeps == 0 || params.swap_interval == 0 {
        return Err(Error::InvalidConfig("sweeps and swap_interval must be at least 1".into()));
    }
    let moves = resolve_moves(params.moves_per_sweep, problem.size())?;
    let bound = problem.lower_bound();
    let stride = trace_stride(params.sweeps);

    let mut swap_rng = rng_from_seed(params.seed);
    let mut rngs: Vec<SimRng> = (0..temps.len()).map(|i| rng_from_seed(chain_seed(params.seed, i))).collect();
    let mut chains = Vec::with_capacity(temps.len());
    for rng in rngs.iter_mut() {
        chains.push(MetropolisChain::new(problem, problem.random_config(rng))?);
    }
    let first = chains.iter().min_by(|a, b| a.cost().total_cmp(&b.cost())).expect("at least two chains");
    let mut progress = Progress::new(first.config(), first.cost(), chains.len() as u64);
    if reached(bound, progress.best_cost) {
        progress.record(0, chains[0].cost(), temps[0]);
        return Ok(progress.finish());
    }

    for sweep in 0..params.sweeps {
        let mut done = false;
        'chains: for ((chain, rng), &t) in chains.iter_mut().zip(rngs.iter_mut()).zip(temps) {
            for _ in 0..moves {
                match chain.step(t, rng) {
                    StepOutcome::Terminal => {
                        done = true;
                        break 'chains;
                    }
                    StepOutcome::Rejected => progress.evaluations += 1,
                    StepOutcome::Accepted(delta) => {
                        progress.evaluations += 1;
                        progress.accepted(delta, chain.config(), chain.cost());
                        if reached(bound, progress.best_cost) {
                            done = true;
                            break 'chains;
                        }
                    }
                }
            }
        }
        if !done && (sweep + 1) % params.swap_interval == 0 {
            for i in 0..chains.len() - 1 {
                let p = swap_probability(temps[i], temps[i + 1], chains[i].cost(), chains[i + 1].cost());
                if p >= 1.0 || swap_rng.random::<f64>() < p {
                    let (lo, hi) = chains.split_at_mut(i + 1);
                    std::mem::swap(&mut lo[i].config, &mut hi[0].config);
                    std::mem::swap(&mut lo[i].cost, &mut hi[0].cost);
                }
            }
        }
        if done || sweep % stride == 0 || sweep + 1 == params.sweeps {
            progress.record(sweep, chains[0].cost(), temps[0]);
        }
        if done {
            break;
        }
    }
    Ok(progress.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{Coupling, IsingInstance, SpinConfiguration};

    fn ferro2() -> IsingInstance {
        IsingInstance::new(2, vec![Coupling { i: 0, j: 1, strength: 1.0 }], vec![0.0; 2]).unwrap()
    }

    #[test]
    fn downhill_and_level_moves_always_accepted() {
        let mut rng = rng_from_seed(1);
        for _ in 0..1000 {
            assert!(metropolis_accept(-1.0, 0.3, &mut rng).unwrap());
            assert!(metropolis_accept(0.0, 1e-12, &mut rng).unwrap());
        }
        assert!(metropolis_accept(1.0, 0.0, &mut rng).is_err());
        assert!(metropolis_accept(1.0, -2.0, &mut rng).is_err());
    }

    #[test]
    fn acceptance_rate_at_ln2() {
        let mut rng = rng_from_seed(2);
        let t = 0.7;
        let hits = (0..10_000).filter(|_| metropolis_accept(t * 2f64.ln(), t, &mut rng).unwrap()).count();
        assert!((hits as f64 / 1e4 - 0.5).abs() < 0.02, "{hits}");
        let none = (0..10_000).filter(|_| metropolis_accept(50.0 * t, t, &mut rng).unwrap()).count();
        assert_eq!(none, 0);
    }

    #[test]
    fn ferromagnet_reaches_ground() {
        let params = SaParams {
            schedule: Schedule::geometric_between(2.0, 0.05, 200).unwrap(),
            sweeps: 200,
            moves_per_sweep: None,
            seed: 3,
        };
        let r = simulated_annealing(&ferro2(), &params).unwrap();
        assert_eq!(r.best_cost, -1.0);
        assert_eq!(r.evaluations, 1 + 200 * 2);
    }

    #[test]
    fn zero_temperature_is_greedy() {
        let inst = crate::problems::random_ising(
            16,
            crate::problems::Topology::Grid2d,
            crate::problems::CouplingDistribution::Gaussian,
            &mut rng_from_seed(4),
        )
        .unwrap();
        let params =
            SaParams { schedule: Schedule::constant(1e-9, 100).unwrap(), sweeps: 100, moves_per_sweep: None, seed: 9 };
        let r = simulated_annealing(&inst, &params).unwrap();
        assert_eq!(r.uphill_accepted, 0);
        let initial = inst.cost(&inst.random_config(&mut rng_from_seed(9)));
        assert!(r.trace.last().unwrap().current <= initial);
        assert!(r.trace.windows(2).all(|w| w[1].current <= w[0].current));
    }

    #[test]
    fn schedule_reaching_zero_is_rejected() {
        let params =
            SaParams { schedule: Schedule::linear(1.0, 0.0, 10).unwrap(), sweeps: 11, moves_per_sweep: None, seed: 0 };
        assert!(simulated_annealing(&ferro2(), &params).is_err());
        let ok = SaParams { sweeps: 10, ..params };
        assert!(simulated_annealing(&ferro2(), &ok).is_ok());
    }

    #[test]
    fn detailed_balance_on_two_spins() {
        // Boltzmann weights at T = 1: aligned states e^{+1}, anti-aligned e^{-1}.
        let inst = ferro2();
        let t = 1.0;
        let mut chain = MetropolisChain::new(&inst, SpinConfiguration::new(vec![1, 1]).unwrap()).unwrap();
        let mut rng = rng_from_seed(5);
        let steps = 200_000usize;
        let mut counts = [0usize; 4];
        for _ in 0..steps {
            chain.step(t, &mut rng);
            counts[chain.config().to_index()] += 1;
        }
        let z = 2.0 * 1f64.exp() + 2.0 * (-1f64).exp();
        let expected = [1f64.exp() / z, (-1f64).exp() / z, (-1f64).exp() / z, 1f64.exp() / z];
        // single-flip dynamics are correlated; an integrated autocorrelation of a few steps
        // inflates the multinomial sigma, so allow 3 sigma on an effective sample of steps / 4
        let eff = steps as f64 / 4.0;
        for (c, p) in counts.iter().zip(expected) {
            let freq = *c as f64 / steps as f64;
            let sigma = (p * (1.0 - p) / eff).sqrt();
            assert!((freq - p).abs() < 3.0 * sigma, "freq {freq} vs {p}");
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let inst = crate::problems::random_ising(
            9,
            crate::problems::Topology::Grid2d,
            crate::problems::CouplingDistribution::PlusMinusJ,
            &mut rng_from_seed(6),
        )
        .unwrap();
        let params = SaParams {
            schedule: Schedule::geometric_between(2.0, 0.1, 50).unwrap(),
            sweeps: 50,
            moves_per_sweep: None,
            seed: 77,
        };
        let a = simulated_annealing(&inst, &params).unwrap();
        let b = simulated_annealing(&inst, &params).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.best_config, b.best_config);
        assert!(a.trace.windows(2).all(|w| w[1].best <= w[0].best));
    }

    #[test]
    fn swap_rule() {
        assert_eq!(swap_probability(1.0, 2.0, 3.0, 3.0), 1.0);
        assert_eq!(swap_probability(1.0, 2.0, 5.0, 3.0), 1.0);
        assert!((swap_probability(1.0, 2.0, 3.0, 5.0) - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn tempering_validates_the_ladder() {
        let base = PtParams { temperatures: vec![1.0], sweeps: 10, swap_interval: 1, moves_per_sweep: None, seed: 0 };
        assert!(parallel_tempering(&ferro2(), &base).is_err());
        let desc = PtParams { temperatures: vec![2.0, 1.0], ..base.clone() };
        assert!(parallel_tempering(&ferro2(), &desc).is_err());
        let ok = PtParams { temperatures: geometric_ladder(0.1, 2.0, 4).unwrap(), ..base };
        let r = parallel_tempering(&ferro2(), &ok).unwrap();
        assert_eq!(r.best_cost, -1.0);
        assert_eq!(r.evaluations, 4 + 10 * 4 * 2);
    }
}
