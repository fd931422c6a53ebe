//! Graph k-coloring scored by the number of monochromatic edges.

use super::{check_len, ExactOracle, Optimum, Problem, ReplicaCoupling, MAX_ENUMERATION_STATES};
use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Serialize, Serializer};
use std::collections::HashSet;

#[derive(Debug, Clone)]
pub struct GraphInstance {
    n: usize,
    edges: Vec<(usize, usize)>,
    k: usize,
    adjacency: Vec<Vec<usize>>,
}

impl GraphInstance {
    pub fn new(n: usize, edges: Vec<(usize, usize)>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInstance("at least one color is required".into()));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &edges {
            if !(u < v && v < n) {
                return Err(Error::InvalidInstance(format!("edge ({u}, {v}) must satisfy 0 <= u < v < {n}")));
            }
            if !seen.insert((u, v)) {
                return Err(Error::InvalidInstance(format!("duplicate edge ({u}, {v})")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        Ok(Self { n, edges, k, adjacency })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Same graph with a different palette size.
    pub fn with_colors(&self, k: usize) -> Result<Self> {
        Self::new(self.n, self.edges.clone(), k)
    }

    /// Builds a configuration from raw colors, caching per-vertex conflicts.
    pub fn coloring(&self, colors: Vec<usize>) -> Result<ColoringConfiguration> {
        check_len(self.n, colors.len())?;
        if let Some(c) = colors.iter().find(|&&c| c >= self.k) {
            return Err(Error::InvalidParameter(format!("color {c} is outside 0..{}", self.k)));
        }
        Ok(self.coloring_unchecked(colors))
    }

    fn coloring_unchecked(&self, colors: Vec<usize>) -> ColoringConfiguration {
        let mut cfg = ColoringConfiguration {
            colors,
            conflicts_at: vec![0; self.n],
            conflicted: Vec::new(),
            slot: vec![usize::MAX; self.n],
            total: 0,
        };
        for &(u, v) in &self.edges {
            if cfg.colors[u] == cfg.colors[v] {
                cfg.conflicts_at[u] += 1;
                cfg.conflicts_at[v] += 1;
                cfg.total += 1;
            }
        }
        for v in 0..self.n {
            if cfg.conflicts_at[v] > 0 {
                cfg.insert(v);
            }
        }
        cfg
    }
}

/// Number of edges whose endpoints share a color.
pub fn coloring_conflicts(graph: &GraphInstance, colors: &[usize]) -> Result<usize> {
    check_len(graph.n, colors.len())?;
    if let Some(c) = colors.iter().find(|&&c| c >= graph.k) {
        return Err(Error::InvalidParameter(format!("color {c} is outside 0..{}", graph.k)));
    }
    Ok(graph.edges.iter().filter(|&&(u, v)| colors[u] == colors[v]).count())
}

/// A coloring together with an indexed set of conflicting vertices, so a
/// conflicting vertex can be drawn in constant time.
#[derive(Debug, Clone)]
pub struct ColoringConfiguration {
    colors: Vec<usize>,
    conflicts_at: Vec<u32>,
    conflicted: Vec<usize>,
    slot: Vec<usize>,
    total: usize,
}

impl ColoringConfiguration {
    pub fn colors(&self) -> &[usize] {
        &self.colors
    }

    pub fn conflicts(&self) -> usize {
        self.total
    }

    /// Vertices incident to at least one monochromatic edge.
    pub fn conflicted_vertices(&self) -> &[usize] {
        &self.conflicted
    }

    fn insert(&mut self, v: usize) {
        if self.slot[v] == usize::MAX {
            self.slot[v] = self.conflicted.len();
            self.conflicted.push(v);
        }
    }

    fn remove(&mut self, v: usize) {
        let at = self.slot[v];
        if at != usize::MAX {
            let last = *self.conflicted.last().expect("slot implies membership");
            self.conflicted.swap_remove(at);
            if last != v {
                self.slot[last] = at;
            }
            self.slot[v] = usize::MAX;
        }
    }

    fn refresh(&mut self, v: usize) {
        if self.conflicts_at[v] > 0 {
            self.insert(v);
        } else {
            self.remove(v);
        }
    }
}

impl PartialEq for ColoringConfiguration {
    fn eq(&self, other: &Self) -> bool {
        self.colors == other.colors
    }
}

impl Serialize for ColoringConfiguration {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.colors.serialize(serializer)
    }
}

/// Moves `vertex` into color class `color`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Recolor {
    pub vertex: usize,
    pub color: usize,
}

impl Problem for GraphInstance {
    type Config = ColoringConfiguration;
    type Move = Recolor;

    fn size(&self) -> usize {
        self.n
    }

    fn random_config<R: Rng + ?Sized>(&self, rng: &mut R) -> ColoringConfiguration {
        let colors = (0..self.n).map(|_| rng.random_range(0..self.k)).collect();
        self.coloring_unchecked(colors)
    }

    fn validate(&self, config: &ColoringConfiguration) -> Result<()> {
        check_len(self.n, config.colors.len())?;
        match config.colors.iter().find(|&&c| c >= self.k) {
            Some(c) => Err(Error::InvalidParameter(format!("color {c} is outside 0..{}", self.k))),
            None => Ok(()),
        }
    }

    fn cost(&self, config: &ColoringConfiguration) -> f64 {
        config.total as f64
    }

    /// Picks a conflicting vertex uniformly and a different color uniformly.
    fn propose<R: Rng + ?Sized>(&self, config: &ColoringConfiguration, rng: &mut R) -> Option<Recolor> {
        if config.conflicted.is_empty() || self.k < 2 {
            return None;
        }
        let vertex = config.conflicted[rng.random_range(0..config.conflicted.len())];
        let old = config.colors[vertex];
        let mut color = rng.random_range(0..self.k - 1);
        if color >= old {
            color += 1;
        }
        Some(Recolor { vertex, color })
    }

    fn delta(&self, config: &ColoringConfiguration, mv: Recolor) -> f64 {
        let old = config.colors[mv.vertex];
        let mut d = 0i64;
        for &u in &self.adjacency[mv.vertex] {
            let c = config.colors[u];
            d += i64::from(c == mv.color) - i64::from(c == old);
        }
        d as f64
    }

    fn apply(&self, config: &mut ColoringConfiguration, mv: Recolor) {
        let v = mv.vertex;
        let old = config.colors[v];
        if old == mv.color {
            return;
        }
        for &u in &self.adjacency[v] {
            let c = config.colors[u];
            if c == old {
                config.conflicts_at[u] -= 1;
                config.conflicts_at[v] -= 1;
                config.total -= 1;
                config.refresh(u);
            } else if c == mv.color {
                config.conflicts_at[u] += 1;
                config.conflicts_at[v] += 1;
                config.total += 1;
                config.refresh(u);
            }
        }
        config.colors[v] = mv.color;
        config.refresh(v);
    }

    /// Recolorings of conflicting vertices; empty for a proper coloring.
    fn neighbors(&self, config: &ColoringConfiguration) -> Vec<Recolor> {
        let mut vertices = config.conflicted.clone();
        vertices.sort_unstable();
        vertices
            .into_iter()
            .flat_map(|vertex| {
                let old = config.colors[vertex];
                (0..self.k).filter(move |&c| c != old).map(move |color| Recolor { vertex, color })
            })
            .collect()
    }

    fn lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }
}

impl ReplicaCoupling for GraphInstance {
    /// Minus the number of vertices colored alike in both replicas.
    fn coupling(&self, a: &ColoringConfiguration, b: &ColoringConfiguration) -> f64 {
        -(a.colors.iter().zip(&b.colors).filter(|(x, y)| x == y).count() as f64)
    }

    fn coupling_delta(&self, config: &ColoringConfiguration, mv: Recolor, other: &ColoringConfiguration) -> f64 {
        let theirs = other.colors[mv.vertex];
        let before = f64::from(u8::from(config.colors[mv.vertex] == theirs));
        let after = f64::from(u8::from(mv.color == theirs));
        before - after
    }
}

impl ExactOracle for GraphInstance {
    fn brute_force_optimum(&self) -> Result<Optimum<ColoringConfiguration>> {
        let states = (self.k as f64).powi(self.n as i32);
        if states > MAX_ENUMERATION_STATES as f64 {
            return Err(Error::SearchSpaceTooLarge(format!(
                "{}^{} colorings exceed the limit of 2^24",
                self.k, self.n
            )));
        }
        let mut colors = vec![0usize; self.n];
        let mut conflicts = self.edges.len() as i64;
        let mut best = (conflicts, colors.clone());
        let mut degeneracy = 1u64;
        // odometer over all k^n colorings, updating the conflict count per changed digit
        'outer: loop {
            let mut v = 0;
            loop {
                if v == self.n {
                    break 'outer;
                }
                let old = colors[v];
                let new = if old + 1 == self.k { 0 } else { old + 1 };
                for &u in &self.adjacency[v] {
                    let c = colors[u];
                    conflicts += i64::from(c == new) - i64::from(c == old);
                }
                colors[v] = new;
                if new != 0 {
                    break;
                }
                v += 1;
            }
            if conflicts < best.0 {
                best = (conflicts, colors.clone());
                degeneracy = 1;
            } else if conflicts == best.0 {
                degeneracy += 1;
            }
        }
        Ok(Optimum { config: self.coloring_unchecked(best.1), cost: best.0 as f64, degeneracy })
    }
}

/// A random graph that admits a known proper `k`-coloring.
///
/// Vertices are shuffled into `k` balanced classes and every pair of vertices
/// in different classes is joined independently with probability `edge_prob`.
/// Returns the graph and its planted coloring.
pub fn planted_coloring_instance<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    edge_prob: f64,
    rng: &mut R,
) -> Result<(GraphInstance, Vec<usize>)> {
    if k < 2 || n < k {
        return Err(Error::InvalidParameter(format!("need n >= k >= 2, got n = {n}, k = {k}")));
    }
    if !(edge_prob > 0.0 && edge_prob <= 1.0) {
        return Err(Error::InvalidParameter(format!("edge probability {edge_prob} is outside (0, 1]")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut planted = vec![0; n];
    for (slot, &v) in order.iter().enumerate() {
        planted[v] = slot % k;
    }
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if planted[u] != planted[v] && rng.random::<f64>() < edge_prob {
                edges.push((u, v));
            }
        }
    }
    Ok((GraphInstance::new(n, edges, k)?, planted))
}
