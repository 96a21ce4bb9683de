//! Pittsburgh-style genetic algorithm over raw rule weights: each
//! individual carries one weight per rule of a fixed rule set and decodes to
//! a proper grammar by per-LHS normalization, so crossover and mutation can
//! never leave the feasible set (apart from all-zero weight groups, which
//! are re-mutated on the spot).
//!
//! Runs are reproducible: one seeded stream drives selection, crossover and
//! mutation sequentially, and fitness evaluation is parallel over
//! individuals with a fixed reduction order, so results do not depend on
//! thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataio::Dataset;
use crate::estimation::{objective, EstimationError, EstimatorKind, Sample, SampleItem};
use crate::grammar::{Grammar, GrammarError};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct LearnerConfig {
    pub population_size: usize,
    pub generations: usize,
    /// Probability that a child is produced by uniform crossover of two
    /// tournament winners rather than cloning one.
    pub crossover_rate: f64,
    /// Per-gene mutation probability.
    pub mutation_rate: f64,
    /// Standard deviation of the Gaussian perturbation in raw-weight space.
    pub mutation_sigma: f64,
    /// Individuals copied unchanged to the next generation.
    pub elitism: usize,
    pub seed: u64,
    pub estimator: EstimatorKind,
    /// Stop after this many generations without best-fitness improvement;
    /// 0 disables early stopping.
    pub early_stop_patience: usize,
    /// Record a checkpoint grammar every this many generations; 0 keeps
    /// only the final one.
    pub checkpoint_every: usize,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            population_size: 100,
            generations: 500,
            crossover_rate: 0.9,
            mutation_rate: 0.05,
            mutation_sigma: 0.1,
            elitism: 2,
            seed: 0,
            estimator: EstimatorKind::Ml,
            early_stop_patience: 100,
            checkpoint_every: 25,
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<(), LearnerError> {
        let bad = |r: &str| Err(LearnerError::Config(r.to_string()));
        if self.population_size < 2 {
            return bad("population_size must be at least 2");
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return bad("crossover_rate must be in [0,1]");
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return bad("mutation_rate must be in [0,1]");
        }
        if !(self.mutation_sigma > 0.0) {
            return bad("mutation_sigma must be positive");
        }
        if self.elitism >= self.population_size {
            return bad("elitism must be smaller than population_size");
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error("learner config: {0}")]
    Config(String),
    #[error("dataset has no positive sequences")]
    EmptyPositives,
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error("estimator preflight failed: {0}")]
    Preflight(#[from] EstimationError),
    #[error(
        "infeasible start: all {population} initial individuals have -inf {estimator} fitness"
    )]
    InfeasibleStart {
        population: usize,
        estimator: EstimatorKind,
    },
}

/// Raw weight vector plus its evaluated fitness.
#[derive(Debug, Clone)]
pub struct Individual {
    pub raw_weights: Vec<f64>,
    pub fitness: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    pub median: f64,
}

#[derive(Debug, Clone, Default)]
pub struct TrainingTrace {
    pub generations: Vec<GenerationStats>,
}

impl TrainingTrace {
    /// `generation,best,mean,median` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("generation,best,mean,median\n");
        for s in &self.generations {
            out.push_str(&format!(
                "{},{},{},{}\n",
                s.generation, s.best, s.mean, s.median
            ));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub generation: usize,
    pub grammar: Grammar,
    pub fitness: f64,
}

#[derive(Debug, Clone)]
pub struct TrainingResult {
    pub grammar: Grammar,
    pub best_fitness: f64,
    pub trace: TrainingTrace,
    pub checkpoints: Vec<Checkpoint>,
    pub stopped_early: bool,
}

/// Gene indices grouped by rule LHS, for weight-group repairs.
fn lhs_groups(base: &Grammar) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); base.nt_count()];
    for (i, rule) in base.rules().iter().enumerate() {
        groups[rule.lhs.0].push(i);
    }
    groups.retain(|g| !g.is_empty());
    groups
}

fn repair_zero_groups(
    weights: &mut [f64],
    groups: &[Vec<usize>],
    rng: &mut ChaCha8Rng,
    sigma: f64,
) {
    let normal = Normal::new(0.0, sigma).expect("validated sigma");
    for group in groups {
        while group.iter().map(|&i| weights[i]).sum::<f64>() == 0.0 {
            for &i in group {
                weights[i] = (weights[i] + normal.sample(rng)).max(0.0);
            }
        }
    }
}

/// One generation: elites survive unchanged, the rest of the next
/// population is bred by tournament selection (size 2, first contestant
/// wins ties), uniform crossover and clipped Gaussian mutation, then
/// evaluated. Random draws happen on the sequential stream only.
pub fn evolve_step<F>(
    population: &[Individual],
    base: &Grammar,
    config: &LearnerConfig,
    fitness: F,
    rng: &mut ChaCha8Rng,
) -> Vec<Individual>
where
    F: Fn(&Grammar) -> f64 + Sync,
{
    let pop_size = population.len();
    let mut order: Vec<usize> = (0..pop_size).collect();
    order.sort_by(|&a, &b| {
        population[b]
            .fitness
            .partial_cmp(&population[a].fitness)
            .expect("fitness is never NaN")
            .then(a.cmp(&b))
    });

    let elite_n = config.elitism.min(pop_size);
    let mut next: Vec<Individual> = order[..elite_n]
        .iter()
        .map(|&i| population[i].clone())
        .collect();

    let groups = lhs_groups(base);
    let normal = Normal::new(0.0, config.mutation_sigma).expect("validated sigma");
    let tournament = |rng: &mut ChaCha8Rng| -> usize {
        let a = rng.random_range(0..pop_size);
        let b = rng.random_range(0..pop_size);
        if population[a].fitness >= population[b].fitness {
            a
        } else {
            b
        }
    };

    let mut children: Vec<Vec<f64>> = Vec::with_capacity(pop_size - elite_n);
    while next.len() + children.len() < pop_size {
        let a = tournament(rng);
        let b = tournament(rng);
        let mut weights = if rng.random::<f64>() < config.crossover_rate {
            population[a]
                .raw_weights
                .iter()
                .zip(&population[b].raw_weights)
                .map(|(&wa, &wb)| if rng.random::<bool>() { wa } else { wb })
                .collect()
        } else {
            population[a].raw_weights.clone()
        };
        for w in weights.iter_mut() {
            if rng.random::<f64>() < config.mutation_rate {
                *w = (*w + normal.sample(rng)).max(0.0);
            }
        }
        repair_zero_groups(&mut weights, &groups, rng, config.mutation_sigma);
        children.push(weights);
    }

    let evaluated: Vec<Individual> = children
        .into_par_iter()
        .map(|raw_weights| {
            let fit = match base.with_weights(&raw_weights) {
                Ok(g) => fitness(&g),
                Err(_) => f64::NEG_INFINITY,
            };
            Individual {
                raw_weights,
                fitness: fit,
            }
        })
        .collect();
    next.extend(evaluated);
    next
}

fn stats_of(generation: usize, population: &[Individual]) -> GenerationStats {
    let n = population.len();
    let best = population
        .iter()
        .map(|i| i.fitness)
        .fold(f64::NEG_INFINITY, f64::max);
    let mean = population.iter().map(|i| i.fitness).sum::<f64>() / n as f64;
    let mut sorted: Vec<f64> = population.iter().map(|i| i.fitness).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("fitness is never NaN"));
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    GenerationStats {
        generation,
        best,
        mean,
        median,
    }
}

/// Assemble the estimation sample for a dataset: encoded positives with the
/// map in force per item (per-item map, else the shared one).
pub fn sample_from_dataset(dataset: &Dataset) -> Result<Sample, LearnerError> {
    if dataset.positives.is_empty() {
        return Err(LearnerError::EmptyPositives);
    }
    let mut items = Vec::with_capacity(dataset.positives.len());
    for (i, rec) in dataset.positives.iter().enumerate() {
        let seq = dataset.alphabet.encode(&rec.seq)?;
        items.push(SampleItem::new(seq, dataset.map_for(i).cloned()));
    }
    Ok(Sample {
        items,
        shared_map: dataset.shared_map.clone(),
    })
}

/// Estimate rule probabilities for the rule set of `base` by maximizing the
/// configured objective over the dataset's positives. Returns the best
/// grammar encountered, the per-generation trace, and checkpoint grammars
/// for validation-based selection.
pub fn train(
    dataset: &Dataset,
    base: &Grammar,
    config: &LearnerConfig,
) -> Result<TrainingResult, LearnerError> {
    config.validate()?;
    let sample = sample_from_dataset(dataset)?;

    // Structural problems (missing shared map, length mismatches, a rule
    // set that cannot realize the maps at all) surface on the uniform
    // decode before any search starts. Weight-dependent zero masses later
    // on are ranked as -inf instead.
    let kind = config.estimator;
    objective(kind, &sample, &base.uniform())?;

    let fitness = |g: &Grammar| -> f64 {
        objective(kind, &sample, g).map_or(f64::NEG_INFINITY, |o| o.value)
    };

    let n_genes = base.rules().len();
    let groups = lhs_groups(base);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut initial: Vec<Vec<f64>> = Vec::with_capacity(config.population_size);
    for _ in 0..config.population_size {
        let mut weights: Vec<f64> = (0..n_genes).map(|_| rng.random::<f64>()).collect();
        repair_zero_groups(&mut weights, &groups, &mut rng, config.mutation_sigma);
        initial.push(weights);
    }
    let mut population: Vec<Individual> = initial
        .into_par_iter()
        .map(|raw_weights| {
            let fit = match base.with_weights(&raw_weights) {
                Ok(g) => fitness(&g),
                Err(_) => f64::NEG_INFINITY,
            };
            Individual {
                raw_weights,
                fitness: fit,
            }
        })
        .collect();

    if population.iter().all(|i| i.fitness == f64::NEG_INFINITY) {
        return Err(LearnerError::InfeasibleStart {
            population: config.population_size,
            estimator: kind,
        });
    }

    let best_of = |pop: &[Individual]| -> (f64, Vec<f64>) {
        let mut best_i = 0;
        for (i, ind) in pop.iter().enumerate() {
            if ind.fitness > pop[best_i].fitness {
                best_i = i;
            }
        }
        (pop[best_i].fitness, pop[best_i].raw_weights.clone())
    };

    let mut trace = TrainingTrace::default();
    trace.generations.push(stats_of(0, &population));
    let (mut best_fitness, mut best_weights) = best_of(&population);

    fn push_checkpoint(
        checkpoints: &mut Vec<Checkpoint>,
        base: &Grammar,
        generation: usize,
        fitness: f64,
        weights: &[f64],
    ) -> Result<(), LearnerError> {
        checkpoints.push(Checkpoint {
            generation,
            grammar: base.with_weights(weights)?,
            fitness,
        });
        Ok(())
    }

    let mut checkpoints: Vec<Checkpoint> = Vec::new();
    if config.checkpoint_every > 0 {
        push_checkpoint(&mut checkpoints, base, 0, best_fitness, &best_weights)?;
    }

    let mut stagnant = 0usize;
    let mut stopped_early = false;
    let mut last_gen = 0;
    for gen in 1..=config.generations {
        population = evolve_step(&population, base, config, &fitness, &mut rng);
        trace.generations.push(stats_of(gen, &population));
        let (gen_best, gen_weights) = best_of(&population);
        if gen_best > best_fitness {
            best_fitness = gen_best;
            best_weights = gen_weights;
            stagnant = 0;
        } else {
            stagnant += 1;
        }
        last_gen = gen;
        if config.checkpoint_every > 0 && gen % config.checkpoint_every == 0 {
            push_checkpoint(&mut checkpoints, base, gen, best_fitness, &best_weights)?;
        }
        if config.early_stop_patience > 0 && stagnant >= config.early_stop_patience {
            stopped_early = true;
            break;
        }
    }
    if checkpoints.last().map(|c| c.generation) != Some(last_gen) {
        push_checkpoint(&mut checkpoints, base, last_gen, best_fitness, &best_weights)?;
    }

    Ok(TrainingResult {
        grammar: base.with_weights(&best_weights)?,
        best_fitness,
        trace,
        checkpoints,
        stopped_early,
    })
}
