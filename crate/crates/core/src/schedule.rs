//! Monotone control schedules for temperature and transverse field.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    /// `initial * (1 - t / max_steps)`
    Linear,
    /// `initial * ratio^t`
    Geometric,
    /// `initial / sqrt(t)`, defined for `t >= 1`
    InverseSqrt,
    Constant,
}

/// A non-increasing trajectory `value(t)` for `t` in `0..=max_steps`,
/// clamped below at `floor`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSchedule", into = "RawSchedule")]
pub struct Schedule {
    kind: ScheduleKind,
    initial: f64,
    floor: f64,
    max_steps: u64,
    ratio: f64,
}

/// JSON form: `{"kind":"linear","initial":3.0,"floor":0.0,"max_steps":10000}`.
/// Geometric schedules take either `ratio` or the value reached at `max_steps` as `final`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    kind: ScheduleKind,
    initial: f64,
    #[serde(default)]
    floor: f64,
    max_steps: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ratio: Option<f64>,
    #[serde(default, rename = "final", skip_serializing_if = "Option::is_none")]
    final_value: Option<f64>,
}

impl TryFrom<RawSchedule> for Schedule {
    type Error = Error;

    fn try_from(raw: RawSchedule) -> Result<Self> {
        let ratio = match (raw.kind, raw.ratio, raw.final_value) {
            (ScheduleKind::Geometric, Some(r), None) => r,
            (ScheduleKind::Geometric, None, Some(f)) => {
                if !(f > 0.0 && raw.initial > 0.0 && raw.max_steps > 0) {
                    return Err(Error::InvalidConfig("geometric `final` must be positive".into()));
                }
                (f / raw.initial).powf(1.0 / raw.max_steps as f64)
            }
            (ScheduleKind::Geometric, _, _) => {
                return Err(Error::InvalidConfig("geometric schedules need exactly one of `ratio`, `final`".into()))
            }
            (_, None, None) => 1.0,
            _ => return Err(Error::InvalidConfig("`ratio`/`final` only apply to geometric schedules".into())),
        };
        Schedule::build(raw.kind, raw.initial, raw.floor, raw.max_steps, ratio)
    }
}

impl From<Schedule> for RawSchedule {
    fn from(s: Schedule) -> Self {
        RawSchedule {
            kind: s.kind,
            initial: s.initial,
            floor: s.floor,
            max_steps: s.max_steps,
            ratio: (s.kind == ScheduleKind::Geometric).then_some(s.ratio),
            final_value: None,
        }
    }
}

impl Schedule {
    fn build(kind: ScheduleKind, initial: f64, floor: f64, max_steps: u64, ratio: f64) -> Result<Self> {
        if !(initial.is_finite() && initial > 0.0) {
            return Err(Error::InvalidConfig(format!("initial value {initial} must be positive")));
        }
        if !(floor.is_finite() && floor >= 0.0) {
            return Err(Error::InvalidConfig(format!("floor {floor} must be non-negative")));
        }
        if max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be at least 1".into()));
        }
        if kind == ScheduleKind::Geometric && !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::InvalidConfig(format!("geometric ratio {ratio} is outside (0, 1)")));
        }
        Ok(Self { kind, initial, floor, max_steps, ratio })
    }

    pub fn linear(initial: f64, floor: f64, max_steps: u64) -> Result<Self> {
        Self::build(ScheduleKind::Linear, initial, floor, max_steps, 1.0)
    }

    pub fn geometric(initial: f64, ratio: f64, floor: f64, max_steps: u64) -> Result<Self> {
        Self::build(ScheduleKind::Geometric, initial, floor, max_steps, ratio)
    }

    /// Geometric decay from `initial` to `final_value` over `max_steps`.
    pub fn geometric_between(initial: f64, final_value: f64, max_steps: u64) -> Result<Self> {
        if !(final_value > 0.0 && final_value < initial) {
            return Err(Error::InvalidConfig(format!("final value {final_value} must lie in (0, {initial})")));
        }
        let ratio = (final_value / initial).powf(1.0 / max_steps.max(1) as f64);
        Self::build(ScheduleKind::Geometric, initial, 0.0, max_steps, ratio)
    }

    pub fn inverse_sqrt(initial: f64, floor: f64, max_steps: u64) -> Result<Self> {
        Self::build(ScheduleKind::InverseSqrt, initial, floor, max_steps, 1.0)
    }

    pub fn constant(value: f64, max_steps: u64) -> Result<Self> {
        Self::build(ScheduleKind::Constant, value, 0.0, max_steps, 1.0)
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn initial(&self) -> f64 {
        self.initial
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn max_steps(&self) -> u64 {
        self.max_steps
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    /// Value at integer step `t`.
    pub fn value(&self, t: u64) -> Result<f64> {
        if t > self.max_steps {
            return Err(Error::InvalidParameter(format!("step {t} is beyond max_steps {}", self.max_steps)));
        }
        if self.kind == ScheduleKind::InverseSqrt && t == 0 {
            return Err(Error::InvalidParameter("inverse_sqrt schedules start at t = 1".into()));
        }
        Ok(self.value_at(t as f64))
    }

    /// Value at a continuous step, with `t` clamped to the schedule's domain.
    pub fn value_at(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.max_steps as f64);
        let raw = match self.kind {
            ScheduleKind::Linear => self.initial * (1.0 - t / self.max_steps as f64),
            ScheduleKind::Geometric => self.initial * self.ratio.powf(t),
            ScheduleKind::InverseSqrt => self.initial / t.max(1.0).sqrt(),
            ScheduleKind::Constant => self.initial,
        };
        raw.max(self.floor)
    }

    /// The same trajectory spread over `max_steps` steps; geometric schedules
    /// keep their end value.
    pub fn stretched(&self, max_steps: u64) -> Result<Self> {
        let ratio = match self.kind {
            ScheduleKind::Geometric => self.ratio.powf(self.max_steps as f64 / max_steps.max(1) as f64),
            _ => self.ratio,
        };
        Self::build(self.kind, self.initial, self.floor, max_steps, ratio)
    }
}

/// Effective thermal diffusion constant `gamma * a^2 * exp(-B / kBT)`.
///
/// `kbt` carries Boltzmann's constant, so all energies share one unit.
pub fn thermal_diffusion_coefficient(attempt_rate: f64, spacing: f64, barrier: f64, kbt: f64) -> Result<f64> {
    if !(kbt > 0.0) {
        return Err(Error::InvalidParameter(format!("thermal energy {kbt} must be positive")));
    }
    if !(attempt_rate > 0.0 && spacing > 0.0) {
        return Err(Error::InvalidParameter("attempt rate and lattice spacing must be positive".into()));
    }
    if !(barrier >= 0.0) {
        return Err(Error::InvalidParameter(format!("barrier {barrier} must be non-negative")));
    }
    Ok(attempt_rate * spacing * spacing * (-barrier / kbt).exp())
}
