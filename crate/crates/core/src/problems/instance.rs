use super::{BarrierLandscape, ExactOracle, GraphInstance, IsingInstance, Problem, Rastrigin, TspInstance};
use crate::Result;
use serde::Serialize;

/// Any of the supported problems, as read from an instance file.
#[derive(Debug, Clone)]
pub enum Instance {
    Ising(IsingInstance),
    Graph(GraphInstance),
    Tsp(TspInstance),
    Rastrigin(Rastrigin),
    Barrier(BarrierLandscape),
}

/// Runs `$body` with `$p` bound to the concrete problem inside an [`Instance`].
#[macro_export]
macro_rules! with_problem {
    ($instance:expr, $p:ident => $body:expr) => {
        match $instance {
            $crate::problems::Instance::Ising($p) => $body,
            $crate::problems::Instance::Graph($p) => $body,
            $crate::problems::Instance::Tsp($p) => $body,
            $crate::problems::Instance::Rastrigin($p) => $body,
            $crate::problems::Instance::Barrier($p) => $body,
        }
    };
}

/// Exact optimum in a problem-agnostic form.
#[derive(Debug, Clone, Serialize)]
pub struct ExactSummary {
    pub cost: f64,
    pub config: serde_json::Value,
    pub degeneracy: u64,
}

impl Instance {
    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Ising(_) => "ising",
            Instance::Graph(_) => "graph",
            Instance::Tsp(_) => "tsp",
            Instance::Rastrigin(_) => "rastrigin",
            Instance::Barrier(_) => "barrier",
        }
    }

    pub fn size(&self) -> usize {
        with_problem!(self, p => p.size())
    }

    /// Global optimum: by enumeration for the discrete problems, by scan for
    /// barrier chains, and the origin for Rastrigin.
    pub fn exact_optimum(&self) -> Result<ExactSummary> {
        fn pack<C: Serialize>(cost: f64, config: &C, degeneracy: u64) -> Result<ExactSummary> {
            Ok(ExactSummary { cost, config: serde_json::to_value(config)?, degeneracy })
        }
        match self {
            Instance::Ising(p) => {
                let o = p.brute_force_optimum()?;
                pack(o.cost, &o.config, o.degeneracy)
            }
            Instance::Graph(p) => {
                let o = p.brute_force_optimum()?;
                pack(o.cost, &o.config, o.degeneracy)
            }
            Instance::Tsp(p) => {
                let o = p.brute_force_optimum()?;
                pack(o.cost, &o.config, o.degeneracy)
            }
            Instance::Rastrigin(p) => {
                let origin = p.domain().point(vec![0.0; p.domain().dim])?;
                pack(p.evaluate(&origin), &origin, 1)
            }
            Instance::Barrier(p) => {
                let (site, cost) = p.global_minimum();
                pack(cost, &site, p.degeneracy())
            }
        }
    }
}
