//! Euclidean travelling salesman tours with 2-opt moves.

use super::{check_len, same_cost, ExactOracle, Optimum, Problem, ReplicaCoupling, MAX_ORACLE_CITIES};
use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Serialize, Serializer};

#[derive(Debug, Clone)]
pub struct TspInstance {
    cities: Vec<(f64, f64)>,
    dist: Vec<f64>,
}

impl TspInstance {
    pub fn new(cities: Vec<(f64, f64)>) -> Result<Self> {
        let n = cities.len();
        if n < 3 {
            return Err(Error::InvalidInstance(format!("a tour needs at least 3 cities, got {n}")));
        }
        if cities.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::InvalidInstance("city coordinates must be finite".into()));
        }
        let mut dist = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                let (dx, dy) = (cities[a].0 - cities[b].0, cities[a].1 - cities[b].1);
                dist[a * n + b] = dx.hypot(dy);
            }
        }
        Ok(Self { cities, dist })
    }

    pub fn cities(&self) -> &[(f64, f64)] {
        &self.cities
    }

    pub fn n(&self) -> usize {
        self.cities.len()
    }

    #[inline]
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.cities.len() + b]
    }

    /// Validates `order` as a permutation and builds the tour.
    pub fn tour(&self, order: Vec<usize>) -> Result<Tour> {
        check_len(self.n(), order.len())?;
        Tour::new(order)
    }

    fn length_of(&self, order: &[usize]) -> f64 {
        let n = order.len();
        (0..n).map(|i| self.distance(order[i], order[(i + 1) % n])).sum()
    }
}

/// Closed tour length, including the edge back to the first city.
pub fn tour_length(instance: &TspInstance, tour: &Tour) -> Result<f64> {
    check_len(instance.n(), tour.order.len())?;
    Ok(instance.length_of(&tour.order))
}

/// Cities uniform in the unit square.
pub fn random_tsp<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<TspInstance> {
    TspInstance::new((0..n).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect())
}

/// A visiting order with its inverse permutation.
#[derive(Debug, Clone)]
pub struct Tour {
    order: Vec<usize>,
    pos: Vec<usize>,
}

impl Tour {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut pos = vec![usize::MAX; n];
        for (p, &c) in order.iter().enumerate() {
            if c >= n || pos[c] != usize::MAX {
                return Err(Error::InvalidParameter(format!("{order:?} is not a permutation of 0..{n}")));
            }
            pos[c] = p;
        }
        Ok(Self { order, pos })
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Whether the undirected edge `{a, b}` is part of the tour.
    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let n = self.order.len();
        let p = self.pos[a];
        self.order[(p + 1) % n] == b || self.order[(p + n - 1) % n] == b
    }

    fn shared_edges(&self, other: &Tour) -> usize {
        let n = self.order.len();
        (0..n).filter(|&i| other.has_edge(self.order[i], self.order[(i + 1) % n])).count()
    }
}

impl PartialEq for Tour {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order
    }
}

impl Serialize for Tour {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.order.serialize(serializer)
    }
}

/// Reverses tour positions `i..=j`, with `1 <= i < j < n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoOpt {
    pub i: usize,
    pub j: usize,
}

impl TwoOpt {
    /// Endpoints `(a, b, c, d)`: edges `a-b` and `c-d` are replaced by `a-c` and `b-d`.
    fn endpoints(self, tour: &Tour) -> (usize, usize, usize, usize) {
        let n = tour.order.len();
        (tour.order[self.i - 1], tour.order[self.i], tour.order[self.j], tour.order[(self.j + 1) % n])
    }
}

impl Problem for TspInstance {
    type Config = Tour;
    type Move = TwoOpt;

    fn size(&self) -> usize {
        self.n()
    }

    fn random_config<R: Rng + ?Sized>(&self, rng: &mut R) -> Tour {
        let mut order: Vec<usize> = (0..self.n()).collect();
        order.shuffle(rng);
        Tour::new(order).expect("shuffled identity is a permutation")
    }

    fn validate(&self, config: &Tour) -> Result<()> {
        check_len(self.n(), config.order.len())
    }

    fn cost(&self, config: &Tour) -> f64 {
        self.length_of(&config.order)
    }

    fn propose<R: Rng + ?Sized>(&self, _config: &Tour, rng: &mut R) -> Option<TwoOpt> {
        let n = self.n();
        let a = rng.random_range(1..n);
        let mut b = rng.random_range(1..n - 1);
        if b >= a {
            b += 1;
        }
        Some(TwoOpt { i: a.min(b), j: a.max(b) })
    }

    fn delta(&self, config: &Tour, mv: TwoOpt) -> f64 {
        let (a, b, c, d) = mv.endpoints(config);
        self.distance(a, c) + self.distance(b, d) - self.distance(a, b) - self.distance(c, d)
    }

    fn apply(&self, config: &mut Tour, mv: TwoOpt) {
        config.order[mv.i..=mv.j].reverse();
        for p in mv.i..=mv.j {
            config.pos[config.order[p]] = p;
        }
    }

    fn neighbors(&self, _config: &Tour) -> Vec<TwoOpt> {
        let n = self.n();
        (1..n).flat_map(|i| (i + 1..n).map(move |j| TwoOpt { i, j })).collect()
    }
}

impl ReplicaCoupling for TspInstance {
    /// Minus the number of undirected edges the two tours share.
    fn coupling(&self, a: &Tour, b: &Tour) -> f64 {
        -(a.shared_edges(b) as f64)
    }

    fn coupling_delta(&self, config: &Tour, mv: TwoOpt, other: &Tour) -> f64 {
        let (a, b, c, d) = mv.endpoints(config);
        let shared = |x, y| f64::from(u8::from(other.has_edge(x, y)));
        let added = shared(a, c) + shared(b, d);
        let removed = shared(a, b) + shared(c, d);
        removed - added
    }
}

impl ExactOracle for TspInstance {
    /// Enumerates every tour starting at city 0; each undirected cycle is seen
    /// twice, once per direction.
    fn brute_force_optimum(&self) -> Result<Optimum<Tour>> {
        let n = self.n();
        if n > MAX_ORACLE_CITIES {
            return Err(Error::SearchSpaceTooLarge(format!(
                "{} cities give {}!/2 tours; the limit is {MAX_ORACLE_CITIES} cities",
                n,
                n - 1
            )));
        }
        let mut rest: Vec<usize> = (1..n).collect();
        let mut order = vec![0; n];
        let mut best_len = f64::INFINITY;
        let mut best_order = Vec::new();
        let mut count = 0u64;
        loop {
            order[1..].copy_from_slice(&rest);
            let len = self.length_of(&order);
            if best_len.is_finite() && same_cost(len, best_len) {
                count += 1;
            } else if len < best_len {
                best_len = len;
                best_order = order.clone();
                count = 1;
            }
            if !next_permutation(&mut rest) {
                break;
            }
        }
        Ok(Optimum { config: Tour::new(best_order)?, cost: best_len, degeneracy: count / 2 })
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("pivot has a successor");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng_from_seed;

    #[test]
    fn unit_square_and_triangle() {
        let sq = TspInstance::new(vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap();
        assert_eq!(tour_length(&sq, &sq.tour(vec![0, 1, 2, 3]).unwrap()).unwrap(), 4.0);
        let tri = TspInstance::new(vec![(0.0, 0.0), (3.0, 0.0), (0.0, 4.0)]).unwrap();
        assert_eq!(tour_length(&tri, &tri.tour(vec![0, 1, 2]).unwrap()).unwrap(), 12.0);
    }

    #[test]
    fn rejects_non_permutations() {
        assert!(Tour::new(vec![0, 0, 1]).is_err());
        assert!(Tour::new(vec![0, 3, 1]).is_err());
        assert!(TspInstance::new(vec![(0.0, 0.0), (1.0, 1.0)]).is_err());
    }

    #[test]
    fn six_city_oracle_matches_full_enumeration() {
        let inst = random_tsp(6, &mut rng_from_seed(21)).unwrap();
        // every ordering of all six cities, 720 tours covering the 60 distinct cycles 12 times
        let mut perm: Vec<usize> = (0..6).collect();
        let mut min = f64::INFINITY;
        let mut cycles = std::collections::HashSet::new();
        loop {
            min = min.min(inst.length_of(&perm));
            let start = perm.iter().position(|&c| c == 0).unwrap();
            let mut canon: Vec<usize> = (0..6).map(|k| perm[(start + k) % 6]).collect();
            if canon[1] > canon[5] {
                canon[1..].reverse();
            }
            cycles.insert(canon);
            if !next_permutation(&mut perm) {
                break;
            }
        }
        assert_eq!(cycles.len(), 60);
        let opt = inst.brute_force_optimum().unwrap();
        assert!((opt.cost - min).abs() < 1e-12);
        assert_eq!(opt.degeneracy, 1);
    }

    #[test]
    fn oracle_cap() {
        let inst = random_tsp(11, &mut rng_from_seed(1)).unwrap();
        assert!(inst.brute_force_optimum().is_err());
    }

    #[test]
    fn two_opt_keeps_positions_consistent() {
        let inst = random_tsp(9, &mut rng_from_seed(3)).unwrap();
        let mut rng = rng_from_seed(4);
        let mut tour = inst.random_config(&mut rng);
        for _ in 0..100 {
            let mv = inst.propose(&tour, &mut rng).unwrap();
            assert!(1 <= mv.i && mv.i < mv.j && mv.j < 9);
            inst.apply(&mut tour, mv);
            for (p, &c) in tour.order().iter().enumerate() {
                assert_eq!(tour.pos[c], p);
            }
        }
    }
}
