//! Exact state-vector emulation of adiabatic evolution on small
//! transverse-field Ising systems (units with hbar = 1).
//!
//! The driver is `H_B = -driver * sum_i sigma_x^i`, whose ground state is the
//! uniform superposition; the problem Hamiltonian `H_P` is diagonal and holds
//! the Ising energy of each basis state. Basis index bit `i` set means spin
//! `i` points down (`s_i = -1`).

use crate::problems::{ExactOracle, IsingInstance, COST_TOLERANCE};
use crate::schedule::Schedule;
use crate::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Default qubit cap: 4096 amplitudes.
pub const DEFAULT_QUBIT_CAP: usize = 12;

/// Largest system handed to the dense eigensolver.
pub const MAX_DENSE_QUBITS: usize = 10;

/// Accepted deviation of the squared norm from 1.
pub const NORM_TOLERANCE: f64 = 1e-6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Number of amplitudes `2^n`, refused above [`DEFAULT_QUBIT_CAP`].
pub fn state_dim(n: usize) -> Result<usize> {
    state_dim_capped(n, DEFAULT_QUBIT_CAP)
}

pub fn state_dim_capped(n: usize, cap: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::InvalidParameter("at least one qubit is required".into()));
    }
    if n > cap || n >= usize::BITS as usize {
        let states = if n < 128 { 1u128 << n } else { u128::MAX };
        return Err(Error::DimensionCap { n, cap, states, elements: states.saturating_mul(states) });
    }
    Ok(1 << n)
}

/// Elements of a dense `2^n x 2^n` operator.
pub fn operator_elements(n: usize) -> u128 {
    1u128.checked_shl(2 * n as u32).unwrap_or(u128::MAX)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    /// `|+...+>`, the driver's ground state.
    pub fn uniform(qubits: usize) -> Result<Self> {
        let dim = state_dim_capped(qubits, usize::BITS as usize - 1)?;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Ok(Self { qubits, amplitudes: vec![a; dim] })
    }

    pub fn basis(qubits: usize, index: usize) -> Result<Self> {
        let dim = state_dim_capped(qubits, usize::BITS as usize - 1)?;
        if index >= dim {
            return Err(Error::InvalidParameter(format!("basis index {index} out of range for {qubits} qubits")));
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { qubits, amplitudes })
    }

    /// Wraps raw amplitudes; the length must be a power of two and the state normalized.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("{dim} amplitudes is not a power of two >= 2")));
        }
        let state = Self { qubits: dim.trailing_zeros() as usize, amplitudes };
        state.check_normalized()?;
        Ok(state)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check_normalized(&self) -> Result<()> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Unnormalized(n));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AqcMode {
    /// `H = (1 - s) H_B + s H_P` with `s = t / T`.
    Interpolate,
    /// `H = gamma(t) H_B + H_P` with `gamma` from a schedule over physical time.
    TransverseSchedule,
}

/// Evolution settings as read from JSON; [`AqcSpec::new`] binds them to an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AqcConfig {
    pub mode: AqcMode,
    pub total_time: f64,
    pub dt: f64,
    #[serde(default = "default_driver")]
    pub driver_strength: f64,
    /// Transverse-field schedule, indexed by physical time.
    #[serde(default)]
    pub schedule: Option<Schedule>,
    /// Trace rows written during evolution (the final time is always included).
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Grid intervals for gap scans.
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default = "default_cap")]
    pub qubit_cap: usize,
}

fn default_driver() -> f64 {
    1.0
}
fn default_samples() -> usize {
    100
}
fn default_resolution() -> usize {
    1000
}
fn default_cap() -> usize {
    DEFAULT_QUBIT_CAP
}

impl AqcConfig {
    pub fn interpolate(total_time: f64, dt: f64) -> Self {
        Self {
            mode: AqcMode::Interpolate,
            total_time,
            dt,
            driver_strength: default_driver(),
            schedule: None,
            samples: default_samples(),
            resolution: default_resolution(),
            qubit_cap: default_cap(),
        }
    }

    pub fn transverse(schedule: Schedule, total_time: f64, dt: f64) -> Self {
        Self { mode: AqcMode::TransverseSchedule, schedule: Some(schedule), ..Self::interpolate(total_time, dt) }
    }
}

/// An evolution problem: instance, Hamiltonian path and integration grid.
#[derive(Debug, Clone)]
pub struct AqcSpec {
    instance: IsingInstance,
    config: AqcConfig,
    diagonal: Vec<f64>,
}

impl AqcSpec {
    pub fn new(instance: IsingInstance, config: AqcConfig) -> Result<Self> {
        state_dim_capped(instance.n(), config.qubit_cap)?;
        if !(config.dt > 0.0 && config.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("dt = {} must be positive", config.dt)));
        }
        if !(config.total_time >= config.dt && config.total_time.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "total time {} must be at least dt = {}",
                config.total_time, config.dt
            )));
        }
        if !(config.driver_strength > 0.0 && config.driver_strength.is_finite()) {
            return Err(Error::InvalidConfig("driver strength must be positive".into()));
        }
        if config.mode == AqcMode::TransverseSchedule && config.schedule.is_none() {
            return Err(Error::InvalidConfig("transverse_schedule mode needs a `schedule`".into()));
        }
        if config.resolution == 0 || config.samples == 0 {
            return Err(Error::InvalidConfig("resolution and samples must be at least 1".into()));
        }
        let diagonal = instance.energy_table()?;
        Ok(Self { instance, config, diagonal })
    }

    pub fn instance(&self) -> &IsingInstance {
        &self.instance
    }

    pub fn config(&self) -> &AqcConfig {
        &self.config
    }

    pub fn qubits(&self) -> usize {
        self.instance.n()
    }

    /// Energies of `H_P` on the computational basis.
    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// Weights `(a, b)` of `H = a H_B + b H_P` at a control point: the
    /// interpolation parameter `s` or, in schedule mode, the physical time.
    pub fn weights(&self, control: f64) -> (f64, f64) {
        match self.config.mode {
            AqcMode::Interpolate => (1.0 - control, control),
            AqcMode::TransverseSchedule => {
                let gamma = self.config.schedule.as_ref().map_or(0.0, |s| s.value_at(control));
                (gamma, 1.0)
            }
        }
    }

    /// Control value at physical time `t`.
    fn control_at(&self, t: f64) -> f64 {
        match self.config.mode {
            AqcMode::Interpolate => t / self.config.total_time,
            AqcMode::TransverseSchedule => t,
        }
    }

    /// The reported `s_or_gamma` column at physical time `t`.
    fn reported_control(&self, t: f64) -> f64 {
        match self.config.mode {
            AqcMode::Interpolate => t / self.config.total_time,
            AqcMode::TransverseSchedule => self.weights(t).0,
        }
    }

    fn apply_weighted(&self, a: f64, b: f64, psi: &[Complex64], out: &mut [Complex64]) {
        let n = self.qubits();
        let drive = -self.config.driver_strength * a;
        for (x, o) in out.iter_mut().enumerate() {
            let mut flips = ZERO;
            for i in 0..n {
                flips += psi[x ^ (1 << i)];
            }
            *o = psi[x] * (b * self.diagonal[x]) + flips * drive;
        }
    }

    /// Dense real-symmetric matrix of `H` at a control point.
    pub fn dense_hamiltonian(&self, control: f64) -> Result<DMatrix<f64>> {
        let n = self.qubits();
        if n > MAX_DENSE_QUBITS {
            return Err(Error::DimensionCap {
                n,
                cap: MAX_DENSE_QUBITS,
                states: 1 << n,
                elements: operator_elements(n),
            });
        }
        let dim = 1usize << n;
        let (a, b) = self.weights(control);
        let drive = -self.config.driver_strength * a;
        let mut h = DMatrix::zeros(dim, dim);
        for x in 0..dim {
            h[(x, x)] = b * self.diagonal[x];
            for i in 0..n {
                h[(x, x ^ (1 << i))] += drive;
            }
        }
        Ok(h)
    }
}

/// Matrix-free `H psi` at a control point (`s`, or physical time in schedule mode).
pub fn hamiltonian_apply(spec: &AqcSpec, control: f64, psi: &[Complex64]) -> Result<Vec<Complex64>> {
    let dim = spec.diagonal.len();
    if psi.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: psi.len() });
    }
    let (a, b) = spec.weights(control);
    let mut out = vec![ZERO; dim];
    spec.apply_weighted(a, b, psi, &mut out);
    Ok(out)
}

/// One row of the evolution trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolutionSample {
    pub t: f64,
    pub s_or_gamma: f64,
    pub norm: f64,
    pub ground_prob: f64,
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub state: QuantumState,
    pub trace: Vec<EvolutionSample>,
    /// Largest `| ||psi||^2 - 1 |` seen at any step.
    pub max_norm_drift: f64,
}

impl Evolution {
    pub fn final_ground_probability(&self) -> f64 {
        self.trace.last().map_or(0.0, |s| s.ground_prob)
    }
}

/// Basis states attaining the minimum of `H_P`.
fn ground_manifold(diagonal: &[f64]) -> Vec<usize> {
    let min = diagonal.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = COST_TOLERANCE * (1.0 + min.abs());
    (0..diagonal.len()).filter(|&x| diagonal[x] - min <= tol).collect()
}

/// Integrates `d psi / dt = -i H(t) psi` from the uniform superposition with
/// classical RK4 over `ceil(T / dt)` equal steps.
///
/// The norm is never renormalized; a squared-norm drift above
/// [`NORM_TOLERANCE`] aborts with [`Error::NormDrift`].
pub fn evolve(spec: &AqcSpec) -> Result<Evolution> {
    let cfg = &spec.config;
    let steps = (cfg.total_time / cfg.dt).ceil().max(1.0) as u64;
    let h = cfg.total_time / steps as f64;
    let ground = ground_manifold(&spec.diagonal);
    let mut psi = QuantumState::uniform(spec.qubits())?.amplitudes;
    let dim = psi.len();
    let sample_every = steps.div_ceil(cfg.samples as u64).max(1);

    let prob = |psi: &[Complex64]| ground.iter().map(|&x| psi[x].norm_sqr()).sum::<f64>();
    let norm = |psi: &[Complex64]| psi.iter().map(|a| a.norm_sqr()).sum::<f64>();

    // -i H psi
    let deriv = |t: f64, psi: &[Complex64], out: &mut [Complex64]| {
        let (a, b) = spec.weights(spec.control_at(t));
        spec.apply_weighted(a, b, psi, out);
        for o in out.iter_mut() {
            *o = Complex64::new(o.im, -o.re);
        }
    };

    let mut trace = vec![EvolutionSample {
        t: 0.0,
        s_or_gamma: spec.reported_control(0.0),
        norm: norm(&psi),
        ground_prob: prob(&psi),
    }];
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![ZERO; dim], vec![ZERO; dim], vec![ZERO; dim], vec![ZERO; dim], vec![ZERO; dim]);
    let mut max_drift = 0.0f64;
    for step in 0..steps {
        let t = step as f64 * h;
        deriv(t, &psi, &mut k1);
        for x in 0..dim {
            tmp[x] = psi[x] + k1[x] * (0.5 * h);
        }
        deriv(t + 0.5 * h, &tmp, &mut k2);
        for x in 0..dim {
            tmp[x] = psi[x] + k2[x] * (0.5 * h);
        }
        deriv(t + 0.5 * h, &tmp, &mut k3);
        for x in 0..dim {
            tmp[x] = psi[x] + k3[x] * h;
        }
        deriv(t + h, &tmp, &mut k4);
        for x in 0..dim {
            psi[x] += (k1[x] + (k2[x] + k3[x]) * 2.0 + k4[x]) * (h / 6.0);
        }
        let t_next = (step + 1) as f64 * h;
        let n = norm(&psi);
        let drift = (n - 1.0).abs();
        max_drift = max_drift.max(drift);
        if !(drift <= NORM_TOLERANCE) {
            return Err(Error::NormDrift { drift, tolerance: NORM_TOLERANCE, time: t_next });
        }
        if (step + 1) % sample_every == 0 || step + 1 == steps {
            trace.push(EvolutionSample {
                t: t_next,
                s_or_gamma: spec.reported_control(t_next),
                norm: n,
                ground_prob: prob(&psi),
            });
        }
    }
    Ok(Evolution { state: QuantumState { qubits: spec.qubits(), amplitudes: psi }, trace, max_norm_drift: max_drift })
}

/// One grid point of a spectral scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapPoint {
    pub s: f64,
    pub e0: f64,
    pub e1: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapScan {
    pub g_min: f64,
    pub s_star: f64,
    pub curve: Vec<GapPoint>,
}

/// Scans `E1 - E0` of `H(s)` on `resolution + 1` evenly spaced points of
/// `s` in `[0, 1]` by dense diagonalization. In schedule mode `s` is the
/// fraction of the total time.
pub fn minimum_gap(spec: &AqcSpec, resolution: usize) -> Result<GapScan> {
    if resolution == 0 {
        return Err(Error::InvalidParameter("resolution must be at least 1".into()));
    }
    let mut curve = Vec::with_capacity(resolution + 1);
    for k in 0..=resolution {
        let s = k as f64 / resolution as f64;
        let control = match spec.config.mode {
            AqcMode::Interpolate => s,
            AqcMode::TransverseSchedule => s * spec.config.total_time,
        };
        let eig = SymmetricEigen::new(spec.dense_hamiltonian(control)?);
        let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        curve.push(GapPoint { s, e0: ev[0], e1: ev[1], gap: ev[1] - ev[0] });
    }
    let at = curve.iter().min_by(|a, b| a.gap.total_cmp(&b.gap)).expect("non-empty grid");
    Ok(GapScan { g_min: at.gap, s_star: at.s, curve })
}

/// Draws a basis index with probability `|amplitude|^2`.
pub fn measure<R: Rng + ?Sized>(state: &QuantumState, rng: &mut R) -> Result<usize> {
    state.check_normalized()?;
    let u = rng.random::<f64>() * state.norm_sqr();
    let mut acc = 0.0;
    for (x, a) in state.amplitudes.iter().enumerate() {
        acc += a.norm_sqr();
        if u < acc {
            return Ok(x);
        }
    }
    // rounding at the top end: last state with non-zero weight
    Ok(state.amplitudes.iter().rposition(|a| a.norm_sqr() > 0.0).unwrap_or(0))
}

/// Probability mass on the optimal basis states of `instance`, summed over
/// the whole degenerate ground manifold.
pub fn ground_state_probability(state: &QuantumState, instance: &IsingInstance) -> Result<f64> {
    if state.qubits != instance.n() {
        return Err(Error::DimensionMismatch { expected: instance.n(), got: state.qubits });
    }
    state.check_normalized()?;
    let optimum = instance.brute_force_optimum()?;
    let table = instance.energy_table()?;
    let tol = COST_TOLERANCE * (1.0 + optimum.cost.abs());
    Ok(table.iter().zip(&state.amplitudes).filter(|(e, _)| **e - optimum.cost <= tol).map(|(_, a)| a.norm_sqr()).sum())
}

/// `s,E0,E1,gap` CSV.
pub fn gap_csv(scan: &GapScan) -> String {
    let mut out = String::from("s,E0,E1,gap\n");
    for p in &scan.curve {
        let _ = writeln!(out, "{},{},{},{}", p.s, p.e0, p.e1, p.gap);
    }
    out
}

/// `t,s_or_gamma,norm,ground_prob` CSV.
pub fn evolution_csv(trace: &[EvolutionSample]) -> String {
    let mut out = String::from("t,s_or_gamma,norm,ground_prob\n");
    for p in trace {
        let _ = writeln!(out, "{},{},{},{}", p.t, p.s_or_gamma, p.norm, p.ground_prob);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng_from_seed;

    fn qubit() -> IsingInstance {
        // H_P = -sigma_z
        IsingInstance::from_fields(vec![1.0]).unwrap()
    }

    #[test]
    fn dimensions() {
        assert_eq!(state_dim(1).unwrap(), 2);
        assert_eq!(state_dim(5).unwrap(), 32);
        assert_eq!(operator_elements(5), 1024);
        assert_eq!(state_dim(10).unwrap(), 1024);
        assert!(operator_elements(10) > 1_000_000);
        let err = state_dim(13).unwrap_err().to_string();
        assert!(err.contains("2^N") && err.contains("8192"), "{err}");
    }

    #[test]
    fn single_qubit_gap() {
        let spec = AqcSpec::new(qubit(), AqcConfig::interpolate(1.0, 0.1)).unwrap();
        let scan = minimum_gap(&spec, 1000).unwrap();
        assert!((scan.g_min - 2f64.sqrt()).abs() < 1e-9);
        assert!((scan.s_star - 0.5).abs() < 1e-12);
    }

    #[test]
    fn coin_measurement() {
        let h = Complex64::new(0.5f64.sqrt(), 0.0);
        let coin = QuantumState::from_amplitudes(vec![h, h]).unwrap();
        let mut rng = rng_from_seed(3);
        let heads = (0..10_000).filter(|_| measure(&coin, &mut rng).unwrap() == 0).count();
        assert!((heads as f64 / 1e4 - 0.5).abs() < 0.02);
        assert!(QuantumState::from_amplitudes(vec![h, ZERO, ZERO, ZERO]).is_err());
    }

    #[test]
    fn degenerate_ground_probability() {
        let ferro =
            IsingInstance::new(2, vec![crate::problems::Coupling { i: 0, j: 1, strength: 1.0 }], vec![0.0; 2]).unwrap();
        let p = ground_state_probability(&QuantumState::uniform(2).unwrap(), &ferro).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn coarse_step_trips_the_norm_sentinel() {
        let spec = AqcSpec::new(qubit(), AqcConfig::interpolate(50.0, 0.7)).unwrap();
        assert!(matches!(evolve(&spec), Err(Error::NormDrift { .. })));
    }
}
