//! Population-based incremental learning over programme chromosomes.
//!
//! A probability vector `p` holds one Bernoulli parameter per bit. Each
//! generation samples a fresh population from `p`, evaluates it by
//! simulation, moves `p` toward the best individual and perturbs it.

mod evaluate;
mod pbil;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lights::{Chromosome, LightsError};
use crate::sim::SimError;

#[cfg(feature = "parallel")]
pub use evaluate::evaluate_population_parallel;
pub use evaluate::{
    evaluate, evaluate_population, evaluate_population_sequential, evaluation_rng,
    EvaluatedIndividual, Evaluator,
};
pub use pbil::{generations_csv, pbil_run, run_pbil, GenerationReport, PbilOutcome};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvoError {
    #[error("invalid PBIL parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Lights(#[from] LightsError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("no feasible individual after {attempts} random redraws")]
    NoFeasibleIndividual { attempts: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PbilParams {
    /// Learning rate toward the best individual.
    pub theta1: f64,
    /// Per-component mutation probability.
    pub theta2: f64,
    /// Mutation shift toward a fair random bit.
    pub theta3: f64,
    pub pop_size: usize,
    pub max_generations: usize,
    /// Stop after this many generations without an improvement above 1e-9.
    pub patience: usize,
    /// Random redraws allowed for an irreparable individual.
    pub retry_limit: usize,
    pub seed: u64,
}

impl Default for PbilParams {
    fn default() -> Self {
        Self {
            theta1: 0.1,
            theta2: 0.02,
            theta3: 0.05,
            pop_size: 50,
            max_generations: 100,
            patience: 20,
            retry_limit: 100,
            seed: 0,
        }
    }
}

impl PbilParams {
    pub fn check(&self) -> Result<(), EvoError> {
        for (name, v) in [
            ("theta1", self.theta1),
            ("theta2", self.theta2),
            ("theta3", self.theta3),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(EvoError::InvalidParams(format!(
                    "{name} must lie in (0, 1), got {v}"
                )));
            }
        }
        if self.pop_size < 2 {
            return Err(EvoError::InvalidParams(format!(
                "pop_size must be at least 2, got {}",
                self.pop_size
            )));
        }
        Ok(())
    }
}

/// Per-bit probabilities of sampling a one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    /// Components are clamped into `[0, 1]`.
    pub fn from_vec(mut p: Vec<f64>) -> Self {
        for x in &mut p {
            *x = x.clamp(0.0, 1.0);
        }
        Self(p)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Mean binary entropy per component, in bits: 1 for the uniform
    /// vector, 0 once every component is 0 or 1.
    pub fn entropy(&self) -> f64 {
        if self.0.is_empty() {
            return 0.0;
        }
        let h = |p: f64| {
            if p <= 0.0 || p >= 1.0 {
                0.0
            } else {
                -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
            }
        };
        self.0.iter().map(|&p| h(p)).sum::<f64>() / self.0.len() as f64
    }
}

/// `d` components, all 0.5.
pub fn init_probability_vector(d: usize) -> ProbabilityVector {
    ProbabilityVector(vec![0.5; d])
}

/// `pop_size` independent chromosomes; bit `k` is one with probability `p[k]`.
pub fn sample_population<R: Rng + ?Sized>(
    p: &ProbabilityVector,
    pop_size: usize,
    rng: &mut R,
) -> Vec<Chromosome> {
    (0..pop_size)
        .map(|_| Chromosome::from_bits(p.0.iter().map(|&pk| rng.gen::<f64>() < pk).collect()))
        .collect()
}

/// `p_k <- p_k (1 - θ1) + x_k θ1`, written as `p_k + θ1 (x_k - p_k)` so that
/// 0 and 1 are exact fixed points.
pub fn update_towards_best(
    p: &ProbabilityVector,
    best: &Chromosome,
    theta1: f64,
) -> ProbabilityVector {
    assert_eq!(
        p.len(),
        best.len(),
        "probability vector and chromosome lengths differ"
    );
    ProbabilityVector(
        p.0.iter()
            .zip(best.bits())
            .map(|(&pk, &x)| (pk + theta1 * (f64::from(u8::from(x)) - pk)).clamp(0.0, 1.0))
            .collect(),
    )
}

/// With probability `θ2` per component: `p_k <- p_k (1 - θ3) + b θ3` for a fair random bit `b`.
pub fn mutate_vector<R: Rng + ?Sized>(
    p: &ProbabilityVector,
    theta2: f64,
    theta3: f64,
    rng: &mut R,
) -> ProbabilityVector {
    ProbabilityVector(
        p.0.iter()
            .map(|&pk| {
                if rng.gen::<f64>() < theta2 {
                    let b = f64::from(u8::from(rng.gen::<bool>()));
                    (pk + theta3 * (b - pk)).clamp(0.0, 1.0)
                } else {
                    pk
                }
            })
            .collect(),
    )
}
