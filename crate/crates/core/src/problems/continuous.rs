//! Rastrigin's function on a box domain.

use super::{check_len, Problem, ReplicaCoupling};
use crate::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `f(x) = 10 n + sum_i (x_i^2 - 10 cos(2 pi x_i))`.
pub fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64 + x.iter().map(|&v| rastrigin_term(v)).sum::<f64>()
}

#[inline]
fn rastrigin_term(v: f64) -> f64 {
    v * v - 10.0 * (2.0 * PI * v).cos()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub dim: usize,
    pub lo: f64,
    pub hi: f64,
}

impl BoxDomain {
    pub const RASTRIGIN_BOUND: f64 = 5.12;

    pub fn new(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        if dim == 0 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidInstance(format!("invalid box: dim {dim}, [{lo}, {hi}]")));
        }
        Ok(Self { dim, lo, hi })
    }

    /// The standard `[-5.12, 5.12]^dim` hypercube.
    pub fn rastrigin(dim: usize) -> Result<Self> {
        Self::new(dim, -Self::RASTRIGIN_BOUND, Self::RASTRIGIN_BOUND)
    }

    pub fn point(&self, x: Vec<f64>) -> Result<ContinuousPoint> {
        check_len(self.dim, x.len())?;
        if let Some(v) = x.iter().find(|v| !(self.lo..=self.hi).contains(*v)) {
            return Err(Error::InvalidParameter(format!("coordinate {v} lies outside [{}, {}]", self.lo, self.hi)));
        }
        Ok(ContinuousPoint { x })
    }

    /// Folds `v` back into `[lo, hi]` by mirror reflection at the walls.
    pub fn reflect(&self, mut v: f64) -> f64 {
        let width = self.hi - self.lo;
        let period = 2.0 * width;
        let mut off = (v - self.lo).rem_euclid(period);
        if off > width {
            off = period - off;
        }
        v = self.lo + off;
        v.clamp(self.lo, self.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ContinuousPoint {
    x: Vec<f64>,
}

impl ContinuousPoint {
    pub fn coords(&self) -> &[f64] {
        &self.x
    }
}

/// Rastrigin minimization with single-coordinate Gaussian proposals of width `step`.
#[derive(Debug, Clone)]
pub struct Rastrigin {
    domain: BoxDomain,
    step: f64,
    kernel: Normal<f64>,
}

impl Rastrigin {
    pub fn new(domain: BoxDomain, step: f64) -> Result<Self> {
        let kernel = Normal::new(0.0, step)
            .map_err(|_| Error::InvalidParameter(format!("step width {step} must be positive")))?;
        if !(step > 0.0) {
            return Err(Error::InvalidParameter(format!("step width {step} must be positive")));
        }
        Ok(Self { domain, step, kernel })
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn evaluate(&self, point: &ContinuousPoint) -> f64 {
        rastrigin(&point.x)
    }
}

/// Sets coordinate `axis` to `value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shift {
    pub axis: usize,
    pub value: f64,
}

impl Problem for Rastrigin {
    type Config = ContinuousPoint;
    type Move = Shift;

    fn size(&self) -> usize {
        self.domain.dim
    }

    fn random_config<R: Rng + ?Sized>(&self, rng: &mut R) -> ContinuousPoint {
        let x = (0..self.domain.dim).map(|_| rng.random_range(self.domain.lo..=self.domain.hi)).collect();
        ContinuousPoint { x }
    }

    fn validate(&self, config: &ContinuousPoint) -> Result<()> {
        self.domain.point(config.x.clone()).map(|_| ())
    }

    fn cost(&self, config: &ContinuousPoint) -> f64 {
        rastrigin(&config.x)
    }

    fn propose<R: Rng + ?Sized>(&self, config: &ContinuousPoint, rng: &mut R) -> Option<Shift> {
        let axis = rng.random_range(0..self.domain.dim);
        let value = self.domain.reflect(config.x[axis] + self.kernel.sample(rng));
        Some(Shift { axis, value })
    }

    fn delta(&self, config: &ContinuousPoint, mv: Shift) -> f64 {
        rastrigin_term(mv.value) - rastrigin_term(config.x[mv.axis])
    }

    fn apply(&self, config: &mut ContinuousPoint, mv: Shift) {
        config.x[mv.axis] = mv.value;
    }

    /// Axis-aligned stencil of `+-step` per coordinate, reflected into the box.
    fn neighbors(&self, config: &ContinuousPoint) -> Vec<Shift> {
        let mut out = Vec::with_capacity(2 * self.domain.dim);
        for (axis, &v) in config.x.iter().enumerate() {
            for dir in [-1.0, 1.0] {
                let value = self.domain.reflect(v + dir * self.step);
                if value != v {
                    out.push(Shift { axis, value });
                }
            }
        }
        out
    }
}

impl ReplicaCoupling for Rastrigin {
    /// Harmonic spring `|a - b|^2` between neighbouring replicas.
    fn coupling(&self, a: &ContinuousPoint, b: &ContinuousPoint) -> f64 {
        a.x.iter().zip(&b.x).map(|(p, q)| (p - q) * (p - q)).sum()
    }

    fn coupling_delta(&self, config: &ContinuousPoint, mv: Shift, other: &ContinuousPoint) -> f64 {
        let b = other.x[mv.axis];
        let old = config.x[mv.axis] - b;
        let new = mv.value - b;
        new * new - old * old
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng_from_seed;

    #[test]
    fn reference_values() {
        assert_eq!(rastrigin(&[0.0; 7]), 0.0);
        assert!((rastrigin(&[1.0, 1.0]) - 2.0).abs() < 1e-12);
        assert!((rastrigin(&[0.5]) - 20.25).abs() < 1e-12);
    }

    #[test]
    fn nonnegative_on_a_dense_grid_with_unique_zero() {
        let steps = 1024;
        let h = 10.24 / steps as f64;
        for a in 0..=steps {
            let x = -5.12 + a as f64 * h;
            let f1 = rastrigin(&[x]);
            assert!(f1 >= 0.0);
            if x.abs() > 1e-9 {
                assert!(f1 > 0.0);
            }
        }
        for a in (0..=steps).step_by(4) {
            for b in (0..=steps).step_by(4) {
                let (x, y) = (-5.12 + a as f64 * h, -5.12 + b as f64 * h);
                let f = rastrigin(&[x, y]);
                assert!(f >= 0.0);
                if x.abs() > 1e-9 || y.abs() > 1e-9 {
                    assert!(f > 0.0);
                }
            }
        }
    }

    #[test]
    fn box_checks_and_reflection() {
        let dom = BoxDomain::rastrigin(2).unwrap();
        assert!(dom.point(vec![5.12, -5.12]).is_ok());
        assert!(dom.point(vec![5.2, 0.0]).is_err());
        assert!(dom.point(vec![0.0]).is_err());
        assert!((dom.reflect(5.5) - 4.74).abs() < 1e-12);
        assert!((dom.reflect(-5.5) + 4.74).abs() < 1e-12);
        assert!((dom.reflect(1.0) - 1.0).abs() < 1e-15);
        let far = dom.reflect(100.0);
        assert!((-5.12..=5.12).contains(&far));
    }

    #[test]
    fn proposals_stay_in_the_box() {
        let p = Rastrigin::new(BoxDomain::rastrigin(3).unwrap(), 2.0).unwrap();
        let mut rng = rng_from_seed(1);
        let mut x = p.random_config(&mut rng);
        for _ in 0..1000 {
            let mv = p.propose(&x, &mut rng).unwrap();
            p.apply(&mut x, mv);
            assert!(p.validate(&x).is_ok());
        }
        assert!(Rastrigin::new(BoxDomain::rastrigin(3).unwrap(), 0.0).is_err());
    }
}
