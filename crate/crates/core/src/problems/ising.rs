//! Ising spin glasses with energy `E = -sum_{i<j} J_ij s_i s_j - sum_i h_i s_i`.

use super::{check_len, same_cost, ExactOracle, Optimum, Problem, ReplicaCoupling, MAX_ENUMERATION_STATES};
use crate::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub i: usize,
    pub j: usize,
    pub strength: f64,
}

#[derive(Debug, Clone)]
pub struct IsingInstance {
    n: usize,
    couplings: Vec<Coupling>,
    fields: Vec<f64>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl IsingInstance {
    pub fn new(n: usize, couplings: Vec<Coupling>, fields: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInstance("an Ising instance needs at least one spin".into()));
        }
        check_len(n, fields.len())?;
        if let Some(h) = fields.iter().find(|h| !h.is_finite()) {
            return Err(Error::InvalidInstance(format!("non-finite field {h}")));
        }
        let mut seen = HashSet::with_capacity(couplings.len());
        let mut adjacency = vec![Vec::new(); n];
        for c in &couplings {
            if !(c.i < c.j && c.j < n) {
                return Err(Error::InvalidInstance(format!(
                    "coupling ({}, {}) must satisfy 0 <= i < j < {n}",
                    c.i, c.j
                )));
            }
            if !c.strength.is_finite() {
                return Err(Error::InvalidInstance(format!("non-finite coupling {}", c.strength)));
            }
            if !seen.insert((c.i, c.j)) {
                return Err(Error::InvalidInstance(format!("duplicate coupling ({}, {})", c.i, c.j)));
            }
            adjacency[c.i].push((c.j, c.strength));
            adjacency[c.j].push((c.i, c.strength));
        }
        Ok(Self { n, couplings, fields, adjacency })
    }

    /// An instance with fields only and no couplings.
    pub fn from_fields(fields: Vec<f64>) -> Result<Self> {
        Self::new(fields.len(), Vec::new(), fields)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn couplings(&self) -> &[Coupling] {
        &self.couplings
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn energy(&self, config: &SpinConfiguration) -> Result<f64> {
        check_len(self.n, config.spins.len())?;
        Ok(self.energy_unchecked(&config.spins))
    }

    fn energy_unchecked(&self, spins: &[i8]) -> f64 {
        let pair: f64 = self.couplings.iter().map(|c| c.strength * f64::from(spins[c.i]) * f64::from(spins[c.j])).sum();
        let field: f64 = self.fields.iter().zip(spins).map(|(h, &s)| h * f64::from(s)).sum();
        -pair - field
    }

    /// `sum_j J_ij s_j + h_i`.
    fn local_field(&self, spins: &[i8], i: usize) -> f64 {
        self.adjacency[i].iter().map(|&(j, w)| w * f64::from(spins[j])).sum::<f64>() + self.fields[i]
    }

    fn flip_delta(&self, spins: &[i8], i: usize) -> f64 {
        2.0 * f64::from(spins[i]) * self.local_field(spins, i)
    }

    /// Energy of every computational basis state, indexed so that bit `i`
    /// set means `s_i = -1`. Filled by a Gray-code walk, one flip per state.
    pub fn energy_table(&self) -> Result<Vec<f64>> {
        let states = self.state_count()?;
        let mut spins = vec![1i8; self.n];
        let mut table = vec![0.0; states as usize];
        let mut energy = self.energy_unchecked(&spins);
        table[0] = energy;
        let mut gray = 0usize;
        for k in 1..states as usize {
            let bit = k.trailing_zeros() as usize;
            energy += self.flip_delta(&spins, bit);
            spins[bit] = -spins[bit];
            gray ^= 1 << bit;
            table[gray] = energy;
        }
        Ok(table)
    }

    fn state_count(&self) -> Result<u64> {
        if self.n > 24 || (1u64 << self.n) > MAX_ENUMERATION_STATES {
            return Err(Error::SearchSpaceTooLarge(format!("2^{} spin states exceed the limit of 2^24", self.n)));
        }
        Ok(1u64 << self.n)
    }

    /// The same instance with spin `i` renamed to `perm[i]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        check_len(self.n, perm.len())?;
        let mut fields = vec![0.0; self.n];
        for (i, &p) in perm.iter().enumerate() {
            fields[p] = self.fields[i];
        }
        let couplings = self
            .couplings
            .iter()
            .map(|c| {
                let (a, b) = (perm[c.i], perm[c.j]);
                Coupling { i: a.min(b), j: a.max(b), strength: c.strength }
            })
            .collect();
        Self::new(self.n, couplings, fields)
    }
}

/// Ising energy under the convention `E = -sum J s s - sum h s`.
pub fn ising_energy(instance: &IsingInstance, config: &SpinConfiguration) -> Result<f64> {
    instance.energy(config)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct SpinConfiguration {
    spins: Vec<i8>,
}

impl SpinConfiguration {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(s) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidParameter(format!("spin value {s} is not +1 or -1")));
        }
        Ok(Self { spins })
    }

    /// Decodes a basis index: bit `i` set means `s_i = -1`.
    pub fn from_index(index: usize, n: usize) -> Self {
        let spins = (0..n).map(|i| if index >> i & 1 == 1 { -1 } else { 1 }).collect();
        Self { spins }
    }

    pub fn to_index(&self) -> usize {
        self.spins.iter().enumerate().filter(|(_, &s)| s < 0).fold(0, |acc, (i, _)| acc | 1 << i)
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }
}

/// Flip of a single spin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flip(pub usize);

impl Problem for IsingInstance {
    type Config = SpinConfiguration;
    type Move = Flip;

    fn size(&self) -> usize {
        self.n
    }

    fn random_config<R: Rng + ?Sized>(&self, rng: &mut R) -> SpinConfiguration {
        let spins = (0..self.n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        SpinConfiguration { spins }
    }

    fn validate(&self, config: &SpinConfiguration) -> Result<()> {
        check_len(self.n, config.spins.len())
    }

    fn cost(&self, config: &SpinConfiguration) -> f64 {
        self.energy_unchecked(&config.spins)
    }

    fn propose<R: Rng + ?Sized>(&self, _config: &SpinConfiguration, rng: &mut R) -> Option<Flip> {
        Some(Flip(rng.random_range(0..self.n)))
    }

    fn delta(&self, config: &SpinConfiguration, mv: Flip) -> f64 {
        self.flip_delta(&config.spins, mv.0)
    }

    fn apply(&self, config: &mut SpinConfiguration, mv: Flip) {
        config.spins[mv.0] = -config.spins[mv.0];
    }

    fn neighbors(&self, _config: &SpinConfiguration) -> Vec<Flip> {
        (0..self.n).map(Flip).collect()
    }
}

impl ReplicaCoupling for IsingInstance {
    fn coupling(&self, a: &SpinConfiguration, b: &SpinConfiguration) -> f64 {
        -a.spins.iter().zip(&b.spins).map(|(&x, &y)| f64::from(x * y)).sum::<f64>()
    }

    fn coupling_delta(&self, config: &SpinConfiguration, mv: Flip, other: &SpinConfiguration) -> f64 {
        2.0 * f64::from(config.spins[mv.0] * other.spins[mv.0])
    }
}

impl ExactOracle for IsingInstance {
    fn brute_force_optimum(&self) -> Result<Optimum<SpinConfiguration>> {
        let table = self.energy_table()?;
        let mut best = 0;
        for (idx, &e) in table.iter().enumerate() {
            if e < table[best] && !same_cost(e, table[best]) {
                best = idx;
            }
        }
        let cost = table[best];
        let degeneracy = table.iter().filter(|&&e| same_cost(e, cost)).count() as u64;
        Ok(Optimum { config: SpinConfiguration::from_index(best, self.n), cost, degeneracy })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Complete,
    Grid2d,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingDistribution {
    /// `J = +1` or `-1` with equal probability.
    #[serde(rename = "pm_j")]
    PlusMinusJ,
    Gaussian,
}

/// Random zero-field instance on the requested topology.
///
/// `Grid2d` is an open (non-periodic) `L x L` lattice and requires `n = L^2`.
pub fn random_ising<R: Rng + ?Sized>(
    n: usize,
    topology: Topology,
    distribution: CouplingDistribution,
    rng: &mut R,
) -> Result<IsingInstance> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let pairs: Vec<(usize, usize)> = match topology {
        Topology::Complete => (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect(),
        Topology::Grid2d => {
            let side = (n as f64).sqrt().round() as usize;
            if side * side != n {
                return Err(Error::InvalidParameter(format!("grid2d needs a square spin count, got {n}")));
            }
            let mut pairs = Vec::with_capacity(2 * n);
            for r in 0..side {
                for c in 0..side {
                    let v = r * side + c;
                    if c + 1 < side {
                        pairs.push((v, v + 1));
                    }
                    if r + 1 < side {
                        pairs.push((v, v + side));
                    }
                }
            }
            pairs
        }
    };
    let couplings = pairs
        .into_iter()
        .map(|(i, j)| {
            let strength = match distribution {
                CouplingDistribution::PlusMinusJ => {
                    if rng.random::<bool>() {
                        1.0
                    } else {
                        -1.0
                    }
                }
                CouplingDistribution::Gaussian => rng.sample(StandardNormal),
            };
            Coupling { i, j, strength }
        })
        .collect();
    IsingInstance::new(n, couplings, vec![0.0; n])
}
