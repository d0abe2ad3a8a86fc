use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    evaluate_population, init_probability_vector, mutate_vector, sample_population,
    update_towards_best, EvaluatedIndividual, Evaluator, EvoError, PbilParams, ProbabilityVector,
};
use crate::lights::EncodingParams;
use crate::netmodel::RoadNetwork;
use crate::sim::{FitnessWeights, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenerationReport {
    pub generation: usize,
    /// All-time best fitness up to and including this generation.
    pub best: f64,
    pub mean: f64,
    /// Individuals replaced because their chromosome was irreparable.
    pub replacements: usize,
    /// Mean per-bit entropy of the vector the generation was sampled from.
    pub entropy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PbilOutcome {
    pub best: EvaluatedIndividual,
    pub reports: Vec<GenerationReport>,
    pub final_vector: ProbabilityVector,
}

fn best_of(pop: &[EvaluatedIndividual]) -> &EvaluatedIndividual {
    pop.iter()
        .reduce(|a, b| if b.beats(a) { b } else { a })
        .expect("population is non-empty")
}

fn report(
    generation: usize,
    best: f64,
    pop: &[EvaluatedIndividual],
    p: &ProbabilityVector,
) -> GenerationReport {
    GenerationReport {
        generation,
        best,
        mean: pop.iter().map(|e| e.fitness).sum::<f64>() / pop.len() as f64,
        replacements: pop.iter().filter(|e| e.was_replaced).count(),
        entropy: p.entropy(),
    }
}

/// Runs the incremental-learning loop. Generation 0 is the initial
/// population; each later generation updates the vector toward the
/// previous generation's best, mutates it, resamples and re-evaluates.
/// Stops after `max_generations` or `patience` generations without an
/// improvement above 1e-9. No individual survives between generations;
/// the all-time best is tracked for the result only.
pub fn run_pbil(evaluator: &Evaluator, pbil: &PbilParams) -> Result<PbilOutcome, EvoError> {
    pbil.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(pbil.seed);
    rng.set_stream(1);
    let mut p = init_probability_vector(evaluator.chromosome_len());

    let population = sample_population(&p, pbil.pop_size, &mut rng);
    let mut evaluated = evaluate_population(evaluator, &population, pbil.seed, 0)?;
    let mut best = best_of(&evaluated).clone();
    let mut reports = vec![report(0, best.fitness, &evaluated, &p)];
    let mut stale = 0;

    for generation in 1..=pbil.max_generations {
        if stale >= pbil.patience {
            break;
        }
        let leader = best_of(&evaluated);
        p = update_towards_best(&p, &leader.chromosome, pbil.theta1);
        p = mutate_vector(&p, pbil.theta2, pbil.theta3, &mut rng);
        let population = sample_population(&p, pbil.pop_size, &mut rng);
        evaluated = evaluate_population(evaluator, &population, pbil.seed, generation)?;
        let leader = best_of(&evaluated);
        if leader.fitness > best.fitness + 1e-9 {
            stale = 0;
        } else {
            stale += 1;
        }
        if leader.beats(&best) {
            best = leader.clone();
        }
        reports.push(report(generation, best.fitness, &evaluated, &p));
    }
    Ok(PbilOutcome {
        best,
        reports,
        final_vector: p,
    })
}

/// Builds an [`Evaluator`] for the network and runs [`run_pbil`].
pub fn pbil_run(
    net: &RoadNetwork,
    params: EncodingParams,
    pbil: &PbilParams,
    cfg: &SimConfig,
    weights: FitnessWeights,
) -> Result<PbilOutcome, EvoError> {
    let evaluator = Evaluator::new(net, params, *cfg, weights, pbil.retry_limit)?;
    run_pbil(&evaluator, pbil)
}

/// `generation,best,mean,replacements,entropy` rows.
pub fn generations_csv(reports: &[GenerationReport]) -> String {
    let mut out = String::from("generation,best,mean,replacements,entropy\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.generation, r.best, r.mean, r.replacements, r.entropy
        );
    }
    out
}
