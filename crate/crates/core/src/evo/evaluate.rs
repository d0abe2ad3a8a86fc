use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::EvoError;
use crate::lights::{
    random_chromosome, Chromosome, EncodingParams, LightsProgramme, ProgrammeCodec, RepairOutcome,
};
use crate::netmodel::RoadNetwork;
use crate::sim::{aggregate_fitness, run, FitnessWeights, Layout, SimConfig, WorldState};

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluatedIndividual {
    /// The chromosome that was simulated: the sampled one, or its random
    /// replacement when the sampled one was irreparable.
    pub chromosome: Chromosome,
    /// Decoded and repaired programme.
    pub programme: LightsProgramme,
    pub fitness: f64,
    pub was_replaced: bool,
}

impl EvaluatedIndividual {
    /// Higher fitness wins; equal fitness goes to the smaller chromosome.
    pub fn beats(&self, other: &Self) -> bool {
        match self.fitness.total_cmp(&other.fitness) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => self.chromosome < other.chromosome,
        }
    }
}

/// Random stream for individual `index` of `generation`. Disjoint from the
/// streams used for sampling and for traffic demand.
pub fn evaluation_rng(seed: u64, generation: usize, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((generation as u64 + 1) << 32) | index as u64);
    rng
}

/// Everything needed to turn a chromosome into a fitness. Shared read-only
/// between worker threads.
#[derive(Debug, Clone)]
pub struct Evaluator {
    codec: ProgrammeCodec,
    layout: Arc<Layout>,
    config: SimConfig,
    weights: FitnessWeights,
    retry_limit: usize,
}

impl Evaluator {
    pub fn new(
        net: &RoadNetwork,
        params: EncodingParams,
        config: SimConfig,
        weights: FitnessWeights,
        retry_limit: usize,
    ) -> Result<Self, EvoError> {
        config.check()?;
        let layout = Arc::new(Layout::new(net)?);
        let codec = ProgrammeCodec::new(params, net)?;
        Ok(Self {
            codec,
            layout,
            config,
            weights,
            retry_limit,
        })
    }

    pub fn codec(&self) -> &ProgrammeCodec {
        &self.codec
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn weights(&self) -> FitnessWeights {
        self.weights
    }

    pub fn chromosome_len(&self) -> usize {
        self.codec.chromosome_len()
    }

    /// Fitness of a feasible programme over `config.total_ticks`.
    pub fn fitness(&self, programme: &LightsProgramme) -> Result<f64, EvoError> {
        let mut world = WorldState::new(Arc::clone(&self.layout), programme.clone(), self.config)?;
        let stats = run(&mut world, self.config.total_ticks);
        Ok(aggregate_fitness(&stats, self.weights))
    }

    /// Decode, repair, and simulate. An irreparable chromosome is replaced
    /// by fresh random ones from `rng` until one repairs or the retry limit
    /// is spent.
    pub fn evaluate<R: Rng + ?Sized>(
        &self,
        chrom: &Chromosome,
        rng: &mut R,
    ) -> Result<EvaluatedIndividual, EvoError> {
        let mut chromosome = chrom.clone();
        let mut was_replaced = false;
        let mut attempts = 0;
        let programme = loop {
            if let RepairOutcome::Repaired(p) = self.codec.repair(&self.codec.decode(&chromosome)?)
            {
                break p;
            }
            if attempts == self.retry_limit {
                return Err(EvoError::NoFeasibleIndividual { attempts });
            }
            attempts += 1;
            chromosome =
                random_chromosome(self.codec.track_count(), self.codec.bits_per_field(), rng);
            was_replaced = true;
        };
        let fitness = self.fitness(&programme)?;
        Ok(EvaluatedIndividual {
            chromosome,
            programme,
            fitness,
            was_replaced,
        })
    }
}

/// One-off evaluation without a prepared [`Evaluator`].
pub fn evaluate<R: Rng + ?Sized>(
    chrom: &Chromosome,
    net: &RoadNetwork,
    params: EncodingParams,
    cfg: &SimConfig,
    weights: FitnessWeights,
    retry_limit: usize,
    rng: &mut R,
) -> Result<EvaluatedIndividual, EvoError> {
    Evaluator::new(net, params, *cfg, weights, retry_limit)?.evaluate(chrom, rng)
}

fn first_error(
    results: Vec<Result<EvaluatedIndividual, EvoError>>,
) -> Result<Vec<EvaluatedIndividual>, EvoError> {
    results.into_iter().collect()
}

/// Evaluates a population in index order on the calling thread.
pub fn evaluate_population_sequential(
    evaluator: &Evaluator,
    population: &[Chromosome],
    seed: u64,
    generation: usize,
) -> Result<Vec<EvaluatedIndividual>, EvoError> {
    first_error(
        population
            .iter()
            .enumerate()
            .map(|(i, c)| evaluator.evaluate(c, &mut evaluation_rng(seed, generation, i)))
            .collect(),
    )
}

/// Evaluates a population on the current rayon pool. Results, including
/// which error is reported, match [`evaluate_population_sequential`].
#[cfg(feature = "parallel")]
pub fn evaluate_population_parallel(
    evaluator: &Evaluator,
    population: &[Chromosome],
    seed: u64,
    generation: usize,
) -> Result<Vec<EvaluatedIndividual>, EvoError> {
    use rayon::prelude::*;
    first_error(
        population
            .par_iter()
            .enumerate()
            .map(|(i, c)| evaluator.evaluate(c, &mut evaluation_rng(seed, generation, i)))
            .collect(),
    )
}

/// Parallel when the `parallel` feature is on, sequential otherwise.
pub fn evaluate_population(
    evaluator: &Evaluator,
    population: &[Chromosome],
    seed: u64,
    generation: usize,
) -> Result<Vec<EvaluatedIndividual>, EvoError> {
    #[cfg(feature = "parallel")]
    {
        evaluate_population_parallel(evaluator, population, seed, generation)
    }
    #[cfg(not(feature = "parallel"))]
    {
        evaluate_population_sequential(evaluator, population, seed, generation)
    }
}
