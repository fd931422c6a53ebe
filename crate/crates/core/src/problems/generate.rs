use super::{
    planted_coloring_instance, random_ising, random_tsp, BarrierSpec, BoxDomain, CouplingDistribution, Instance,
    Rastrigin, Topology,
};
use crate::{rng_from_seed, Result};
use serde::{Deserialize, Serialize};

/// A reproducible instance generator, as used in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "problem", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    Ising {
        n: usize,
        topology: Topology,
        couplings: CouplingDistribution,
        seed: u64,
    },
    /// Planted `k`-colorable graph.
    Graph {
        n: usize,
        k: usize,
        edge_prob: f64,
        seed: u64,
    },
    Tsp {
        cities: usize,
        seed: u64,
    },
    Rastrigin {
        dim: usize,
        #[serde(default = "default_step")]
        step: f64,
    },
    Barrier(BarrierSpec),
}

fn default_step() -> f64 {
    0.5
}

/// A generated instance and the optimum the construction guarantees, if any.
#[derive(Debug, Clone)]
pub struct Generated {
    pub instance: Instance,
    pub known_optimum: Option<f64>,
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<Generated> {
        Ok(match *self {
            GeneratorSpec::Ising { n, topology, couplings, seed } => Generated {
                instance: Instance::Ising(random_ising(n, topology, couplings, &mut rng_from_seed(seed))?),
                known_optimum: None,
            },
            GeneratorSpec::Graph { n, k, edge_prob, seed } => {
                let (graph, _) = planted_coloring_instance(n, k, edge_prob, &mut rng_from_seed(seed))?;
                Generated { instance: Instance::Graph(graph), known_optimum: Some(0.0) }
            }
            GeneratorSpec::Tsp { cities, seed } => Generated {
                instance: Instance::Tsp(random_tsp(cities, &mut rng_from_seed(seed))?),
                known_optimum: None,
            },
            GeneratorSpec::Rastrigin { dim, step } => Generated {
                instance: Instance::Rastrigin(Rastrigin::new(BoxDomain::rastrigin(dim)?, step)?),
                known_optimum: Some(0.0),
            },
            GeneratorSpec::Barrier(spec) => {
                let land = spec.build()?;
                let min = land.global_minimum().1;
                Generated { instance: Instance::Barrier(land), known_optimum: Some(min) }
            }
        })
    }
}
