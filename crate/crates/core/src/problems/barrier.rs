//! One-dimensional chains of wells separated by energy barriers.
//!
//! Two barrier shapes are of interest: thin, tall spikes between deep wells,
//! and wide, shallow plateaus. A walker moves one site at a time.

use super::{same_cost, Problem, ReplicaCoupling};
use crate::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierProfile {
    ThinTall,
    WideShallow,
}

/// Geometry of a barrier landscape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierSpec {
    pub profile: BarrierProfile,
    pub wells: usize,
    pub barrier_width: usize,
    pub barrier_height: f64,
    /// How far the floor of the last well lies below the others.
    pub depth: f64,
    /// Sites per well; odd so that each well has a single bottom site.
    #[serde(default = "BarrierSpec::default_well_width")]
    pub well_width: usize,
    /// Cost increase per site away from a well's bottom.
    #[serde(default = "BarrierSpec::default_well_slope")]
    pub well_slope: f64,
}

impl BarrierSpec {
    fn default_well_width() -> usize {
        9
    }

    fn default_well_slope() -> f64 {
        0.1
    }

    /// Canonical geometry for a profile.
    pub fn for_profile(profile: BarrierProfile) -> Self {
        let (barrier_width, barrier_height) = match profile {
            BarrierProfile::ThinTall => (1, 6.0),
            BarrierProfile::WideShallow => (20, 1.0),
        };
        Self {
            profile,
            wells: 2,
            barrier_width,
            barrier_height,
            depth: 0.5,
            well_width: Self::default_well_width(),
            well_slope: Self::default_well_slope(),
        }
    }

    pub fn build(&self) -> Result<BarrierLandscape> {
        if self.wells < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 wells, got {}", self.wells)));
        }
        if self.barrier_width == 0 || self.well_width == 0 {
            return Err(Error::InvalidParameter("barrier and well widths must be at least 1".into()));
        }
        let finite = [self.barrier_height, self.depth, self.well_slope].iter().all(|v| v.is_finite());
        if !finite || self.depth <= 0.0 || self.well_slope < 0.0 {
            return Err(Error::InvalidParameter("depth must be positive and all heights finite".into()));
        }
        let centre = self.well_width / 2;
        let mut cost = Vec::new();
        for w in 0..self.wells {
            if w > 0 {
                cost.extend(std::iter::repeat_n(self.barrier_height, self.barrier_width));
            }
            let floor = if w + 1 == self.wells { -self.depth } else { 0.0 };
            cost.extend((0..self.well_width).map(|i| floor + self.well_slope * i.abs_diff(centre) as f64));
        }
        let mut landscape = BarrierLandscape::new(cost)?;
        landscape.start = Some(centre);
        Ok(landscape)
    }
}

/// Builds a landscape with the default well shape; the walker starts at the
/// bottom of the first well and the unique global minimum is in the last.
pub fn barrier_landscape(
    profile: BarrierProfile,
    wells: usize,
    barrier_width: usize,
    barrier_height: f64,
    depth: f64,
) -> Result<BarrierLandscape> {
    BarrierSpec { wells, barrier_width, barrier_height, depth, ..BarrierSpec::for_profile(profile) }.build()
}

#[derive(Debug, Clone)]
pub struct BarrierLandscape {
    cost: Vec<f64>,
    start: Option<usize>,
}

impl BarrierLandscape {
    pub fn new(cost: Vec<f64>) -> Result<Self> {
        if cost.len() < 3 {
            return Err(Error::InvalidInstance(format!("chain length {} is below 3", cost.len())));
        }
        if cost.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInstance("site costs must be finite".into()));
        }
        Ok(Self { cost, start: None })
    }

    /// Fixes the initial site of every run; `None` draws it uniformly.
    pub fn with_start(mut self, start: Option<usize>) -> Result<Self> {
        if let Some(s) = start {
            if s >= self.cost.len() {
                return Err(Error::InvalidParameter(format!("start site {s} is off the chain")));
            }
        }
        self.start = start;
        Ok(self)
    }

    pub fn costs(&self) -> &[f64] {
        &self.cost
    }

    pub fn start(&self) -> Option<usize> {
        self.start
    }

    pub fn len(&self) -> usize {
        self.cost.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cost.is_empty()
    }

    /// Index and cost of the lowest site (first one on ties).
    pub fn global_minimum(&self) -> (usize, f64) {
        self.cost
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (i, c)| if c < best.1 { (i, c) } else { best })
    }

    /// Number of sites attaining the global minimum.
    pub fn degeneracy(&self) -> u64 {
        let (_, min) = self.global_minimum();
        self.cost.iter().filter(|&&c| same_cost(c, min)).count() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChainSite(pub usize);

/// Move to an adjacent site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step(pub usize);

impl Problem for BarrierLandscape {
    type Config = ChainSite;
    type Move = Step;

    /// A single walker.
    fn size(&self) -> usize {
        1
    }

    fn random_config<R: Rng + ?Sized>(&self, rng: &mut R) -> ChainSite {
        ChainSite(self.start.unwrap_or_else(|| rng.random_range(0..self.cost.len())))
    }

    fn validate(&self, config: &ChainSite) -> Result<()> {
        if config.0 < self.cost.len() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("site {} is off the chain", config.0)))
        }
    }

    fn cost(&self, config: &ChainSite) -> f64 {
        self.cost[config.0]
    }

    /// Left or right with equal probability; the only inward step at an end.
    fn propose<R: Rng + ?Sized>(&self, config: &ChainSite, rng: &mut R) -> Option<Step> {
        let last = self.cost.len() - 1;
        Some(Step(match config.0 {
            0 => 1,
            s if s == last => last - 1,
            s if rng.random::<bool>() => s + 1,
            s => s - 1,
        }))
    }

    fn delta(&self, config: &ChainSite, mv: Step) -> f64 {
        self.cost[mv.0] - self.cost[config.0]
    }

    fn apply(&self, config: &mut ChainSite, mv: Step) {
        config.0 = mv.0;
    }

    fn neighbors(&self, config: &ChainSite) -> Vec<Step> {
        let s = config.0;
        let mut out = Vec::with_capacity(2);
        if s > 0 {
            out.push(Step(s - 1));
        }
        if s + 1 < self.cost.len() {
            out.push(Step(s + 1));
        }
        out
    }
}

impl ReplicaCoupling for BarrierLandscape {
    /// Harmonic spring between the walker positions of neighbouring replicas.
    fn coupling(&self, a: &ChainSite, b: &ChainSite) -> f64 {
        let d = a.0 as f64 - b.0 as f64;
        d * d
    }

    fn coupling_delta(&self, config: &ChainSite, mv: Step, other: &ChainSite) -> f64 {
        let old = config.0 as f64 - other.0 as f64;
        let new = mv.0 as f64 - other.0 as f64;
        new * new - old * old
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thin_barrier_is_a_single_spike() {
        let land = barrier_landscape(BarrierProfile::ThinTall, 2, 1, 6.0, 0.5).unwrap();
        let c = land.costs();
        assert_eq!(c.len(), 19);
        let spikes: Vec<usize> = (0..c.len()).filter(|&i| c[i] == 6.0).collect();
        assert_eq!(spikes, vec![9]);
        assert!(c[8] < 6.0 && c[10] < 6.0);
    }

    #[test]
    fn global_minimum_in_last_well() {
        let land = barrier_landscape(BarrierProfile::ThinTall, 3, 2, 4.0, 1.0).unwrap();
        let (idx, cost) = land.global_minimum();
        assert_eq!(cost, -1.0);
        assert_eq!(idx, 2 * 9 + 2 * 2 + 4);
        assert_eq!(land.degeneracy(), 1);
        assert_eq!(land.start(), Some(4));
    }

    #[test]
    fn wide_barrier_plateau() {
        let land = barrier_landscape(BarrierProfile::WideShallow, 2, 20, 1.0, 0.5).unwrap();
        let c = land.costs();
        let run = c.windows(20).filter(|w| w.iter().all(|&v| v == 1.0)).count();
        assert_eq!(run, 1);
        assert_eq!(c.len(), 9 + 20 + 9);
    }

    #[test]
    fn invalid_geometry() {
        assert!(barrier_landscape(BarrierProfile::ThinTall, 1, 1, 6.0, 0.5).is_err());
        assert!(barrier_landscape(BarrierProfile::ThinTall, 2, 0, 6.0, 0.5).is_err());
        assert!(barrier_landscape(BarrierProfile::ThinTall, 2, 1, 6.0, 0.0).is_err());
        assert!(BarrierLandscape::new(vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn neighbours_at_the_ends() {
        let land = BarrierLandscape::new(vec![0.0, 1.0, 2.0]).unwrap();
        assert_eq!(land.neighbors(&ChainSite(0)), vec![Step(1)]);
        assert_eq!(land.neighbors(&ChainSite(2)), vec![Step(1)]);
        assert_eq!(land.neighbors(&ChainSite(1)), vec![Step(0), Step(2)]);
    }
}
