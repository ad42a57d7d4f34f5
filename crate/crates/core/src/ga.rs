//! Real-coded genetic algorithm minimizing an objective over a box-bounded
//! chromosome: tournament selection (size 2), arithmetic crossover, Gaussian
//! mutation clipped to the bounds, and elitism.

use rand_distr::{Distribution, Normal};

use crate::rng::{seeded_rng, Rng, SeededRng};

/// Gaussian mutation sigma as a fraction of each gene's bound range.
pub const MUTATION_SIGMA_FACTOR: f64 = 0.1;

#[derive(Debug, thiserror::Error)]
pub enum GaError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("selection over an empty population")]
    EmptyPopulation,
    #[error("objective returned a non-finite value at {0:?}")]
    NonFiniteObjective(Vec<f64>),
    #[error("chromosomes have different lengths ({0} vs {1})")]
    DimensionMismatch(usize, usize),
}

/// GA hyperparameters and per-gene bounds. Bounds default to [0,1] per gene
/// because imputation operates in normalized space.
#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub mutation_rate: f64,
    pub crossover_rate: f64,
    pub elitism_count: usize,
    pub bounds: Vec<(f64, f64)>,
    pub seed: u64,
}

impl GaConfig {
    /// The comparison protocol's settings: 20 chromosomes, 30 generations,
    /// mutation 0.1, crossover 0.9, one elite, unit bounds.
    pub fn benchmark_defaults(n_genes: usize, seed: u64) -> Self {
        GaConfig {
            population_size: 20,
            generations: 30,
            mutation_rate: 0.1,
            crossover_rate: 0.9,
            elitism_count: 1,
            bounds: vec![(0.0, 1.0); n_genes],
            seed,
        }
    }

    /// Same scalar parameters with different bounds.
    pub fn with_bounds(&self, bounds: Vec<(f64, f64)>) -> Self {
        GaConfig { bounds, ..self.clone() }
    }

    pub fn validate(&self) -> Result<(), GaError> {
        if self.population_size < 2 {
            return Err(GaError::InvalidConfig("population_size must be at least 2".into()));
        }
        if self.elitism_count >= self.population_size {
            return Err(GaError::InvalidConfig(
                "elitism_count must be smaller than population_size".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(GaError::InvalidConfig(format!(
                "mutation_rate must lie in [0,1], got {}",
                self.mutation_rate
            )));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return Err(GaError::InvalidConfig(format!(
                "crossover_rate must lie in [0,1], got {}",
                self.crossover_rate
            )));
        }
        if self.bounds.is_empty() {
            return Err(GaError::InvalidConfig("at least one gene is required".into()));
        }
        for (i, (lo, hi)) in self.bounds.iter().enumerate() {
            if !(lo <= hi) {
                return Err(GaError::InvalidConfig(format!(
                    "gene {i} bounds are inverted: ({lo}, {hi})"
                )));
            }
        }
        Ok(())
    }
}

/// Outcome of a GA run (minimization).
#[derive(Debug, Clone, PartialEq)]
pub struct GaResult {
    pub best_chromosome: Vec<f64>,
    pub best_fitness: f64,
    /// Best fitness in the population after each generation; non-increasing
    /// because the elite survives unchanged.
    pub history: Vec<f64>,
}

/// Tournament selection of size 2 with replacement: draw two indices
/// uniformly and return the fitter (smaller fitness).
pub fn select(fitnesses: &[f64], rng: &mut SeededRng) -> Result<usize, GaError> {
    if fitnesses.is_empty() {
        return Err(GaError::EmptyPopulation);
    }
    let i = rng.random_range(0..fitnesses.len());
    let j = rng.random_range(0..fitnesses.len());
    Ok(if fitnesses[i] <= fitnesses[j] { i } else { j })
}

/// Arithmetic crossover: with probability `crossover_rate` the children are
/// the mirrored convex combinations `l*a + (1-l)*b` and `(1-l)*a + l*b`
/// with `l ~ Uniform(0,1)`; otherwise exact copies. Convexity keeps children
/// inside the bounds automatically.
pub fn crossover(
    a: &[f64],
    b: &[f64],
    crossover_rate: f64,
    rng: &mut SeededRng,
) -> Result<(Vec<f64>, Vec<f64>), GaError> {
    if a.len() != b.len() {
        return Err(GaError::DimensionMismatch(a.len(), b.len()));
    }
    if rng.random::<f64>() < crossover_rate {
        let lambda: f64 = rng.random();
        let c1 = a.iter().zip(b).map(|(x, y)| lambda * x + (1.0 - lambda) * y).collect();
        let c2 = a.iter().zip(b).map(|(x, y)| (1.0 - lambda) * x + lambda * y).collect();
        Ok((c1, c2))
    } else {
        Ok((a.to_vec(), b.to_vec()))
    }
}

/// Gaussian mutation: each gene is independently perturbed with probability
/// `mutation_rate` by noise with sigma `0.1 * (hi - lo)`, then clipped.
pub fn mutate(chromosome: &[f64], rng: &mut SeededRng, config: &GaConfig) -> Vec<f64> {
    chromosome
        .iter()
        .enumerate()
        .map(|(g, &value)| {
            let (lo, hi) = config.bounds[g];
            if rng.random::<f64>() < config.mutation_rate {
                let sigma = MUTATION_SIGMA_FACTOR * (hi - lo);
                let noise = if sigma > 0.0 {
                    Normal::new(0.0, sigma).expect("sigma is finite and positive").sample(rng)
                } else {
                    0.0
                };
                (value + noise).clamp(lo, hi)
            } else {
                value
            }
        })
        .collect()
}

/// Run the GA; deterministic under the config seed, minimization convention.
pub fn run(
    mut objective: impl FnMut(&[f64]) -> f64,
    config: &GaConfig,
) -> Result<GaResult, GaError> {
    config.validate()?;
    let mut rng = seeded_rng(config.seed);
    let n_genes = config.bounds.len();

    let mut evaluate = |chromosome: &Vec<f64>| -> Result<f64, GaError> {
        let fitness = objective(chromosome);
        if fitness.is_finite() {
            Ok(fitness)
        } else {
            Err(GaError::NonFiniteObjective(chromosome.clone()))
        }
    };

    let mut population: Vec<Vec<f64>> = (0..config.population_size)
        .map(|_| {
            (0..n_genes)
                .map(|g| {
                    let (lo, hi) = config.bounds[g];
                    rng.random_range(lo..=hi)
                })
                .collect()
        })
        .collect();
    let mut fitnesses: Vec<f64> = Vec::with_capacity(config.population_size);
    for chromosome in &population {
        fitnesses.push(evaluate(chromosome)?);
    }

    let mut best_index = argmin(&fitnesses);
    let mut best_chromosome = population[best_index].clone();
    let mut best_fitness = fitnesses[best_index];

    let mut history = Vec::with_capacity(config.generations);
    for _ in 0..config.generations {
        // elites survive unchanged, with their known fitness
        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&a, &b| fitnesses[a].total_cmp(&fitnesses[b]));
        let mut next_population: Vec<Vec<f64>> = Vec::with_capacity(config.population_size);
        let mut next_fitnesses: Vec<f64> = Vec::with_capacity(config.population_size);
        for &i in order.iter().take(config.elitism_count) {
            next_population.push(population[i].clone());
            next_fitnesses.push(fitnesses[i]);
        }
        while next_population.len() < config.population_size {
            let p1 = select(&fitnesses, &mut rng)?;
            let p2 = select(&fitnesses, &mut rng)?;
            let (c1, c2) = crossover(
                &population[p1],
                &population[p2],
                config.crossover_rate,
                &mut rng,
            )?;
            for child in [c1, c2] {
                if next_population.len() == config.population_size {
                    break;
                }
                let child = mutate(&child, &mut rng, config);
                next_fitnesses.push(evaluate(&child)?);
                next_population.push(child);
            }
        }
        population = next_population;
        fitnesses = next_fitnesses;

        best_index = argmin(&fitnesses);
        if fitnesses[best_index] < best_fitness {
            best_fitness = fitnesses[best_index];
            best_chromosome = population[best_index].clone();
        }
        history.push(fitnesses[best_index]);
    }

    Ok(GaResult { best_chromosome, best_fitness, history })
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..values.len() {
        if values[i] < values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_with_benchmark_settings_finds_the_optimum() {
        let config = GaConfig::benchmark_defaults(1, 7);
        let result = run(|x| (x[0] - 0.5) * (x[0] - 0.5), &config).unwrap();
        assert!(
            (result.best_chromosome[0] - 0.5).abs() < 0.05,
            "best {} not near 0.5",
            result.best_chromosome[0]
        );
        assert_eq!(result.history.len(), 30);
    }

    #[test]
    fn constant_objective_returns_the_constant() {
        let config = GaConfig::benchmark_defaults(2, 3);
        let result = run(|_| 4.25, &config).unwrap();
        assert_eq!(result.best_fitness, 4.25);
        for (g, &v) in result.best_chromosome.iter().enumerate() {
            let (lo, hi) = config.bounds[g];
            assert!(v >= lo && v <= hi);
        }
    }

    #[test]
    fn five_dim_sphere_converges_across_seeds() {
        // oracle: the analytic optimum c
        let center = [0.3, 0.7, 0.5, 0.2, 0.9];
        for seed in 0..10 {
            let config = GaConfig {
                population_size: 50,
                generations: 100,
                ..GaConfig::benchmark_defaults(5, seed)
            };
            let result = run(
                |x| x.iter().zip(&center).map(|(a, c)| (a - c) * (a - c)).sum(),
                &config,
            )
            .unwrap();
            assert!(result.best_fitness < 0.01, "seed {seed}: {}", result.best_fitness);
        }
    }

    #[test]
    fn history_is_non_increasing_and_chromosomes_stay_bounded() {
        let config = GaConfig {
            population_size: 16,
            generations: 40,
            ..GaConfig::benchmark_defaults(3, 11)
        };
        let result = run(|x| (x[0] - x[1]).abs() + x[2], &config).unwrap();
        for w in result.history.windows(2) {
            assert!(w[1] <= w[0]);
        }
        for (g, &v) in result.best_chromosome.iter().enumerate() {
            let (lo, hi) = config.bounds[g];
            assert!(v >= lo && v <= hi);
        }
    }

    #[test]
    fn run_is_deterministic_and_bounds_evaluation_count() {
        let config = GaConfig::benchmark_defaults(2, 19);
        let mut calls_a = 0usize;
        let a = run(
            |x| {
                calls_a += 1;
                x[0] * x[0] + x[1]
            },
            &config,
        )
        .unwrap();
        let mut calls_b = 0usize;
        let b = run(
            |x| {
                calls_b += 1;
                x[0] * x[0] + x[1]
            },
            &config,
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(calls_a, calls_b);
        assert!(calls_a <= config.population_size * (config.generations + 1));
    }

    #[test]
    fn non_finite_objective_is_reported_with_the_chromosome() {
        let config = GaConfig::benchmark_defaults(1, 2);
        let err = run(|_| f64::NAN, &config).unwrap_err();
        assert!(matches!(err, GaError::NonFiniteObjective(_)));
    }

    #[test]
    fn selection_prefers_the_fitter_individual() {
        // exact tournament-2 probability of picking the better of two is 0.75
        let fitnesses = [0.0, 10.0];
        let mut rng = seeded_rng(5);
        let mut zero_wins = 0;
        for _ in 0..1000 {
            if select(&fitnesses, &mut rng).unwrap() == 0 {
                zero_wins += 1;
            }
        }
        assert!(zero_wins >= 700, "index 0 selected only {zero_wins}/1000 times");
    }

    #[test]
    fn selection_of_singleton_population() {
        let mut rng = seeded_rng(1);
        assert_eq!(select(&[3.0], &mut rng).unwrap(), 0);
        assert!(matches!(select(&[], &mut rng), Err(GaError::EmptyPopulation)));
    }

    #[test]
    fn crossover_of_identical_parents_is_identity() {
        let mut rng = seeded_rng(4);
        let a = vec![0.2, 0.4, 0.6];
        let (c1, c2) = crossover(&a, &a, 1.0, &mut rng).unwrap();
        for i in 0..3 {
            assert!((c1[i] - a[i]).abs() < 1e-15);
            assert!((c2[i] - a[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn crossover_children_mirror_each_other() {
        let mut rng = seeded_rng(6);
        let (c1, c2) = crossover(&[0.0], &[1.0], 1.0, &mut rng).unwrap();
        assert!((c1[0] + c2[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn crossover_rate_zero_copies_parents() {
        let mut rng = seeded_rng(8);
        let a = vec![0.1, 0.9];
        let b = vec![0.8, 0.3];
        let (c1, c2) = crossover(&a, &b, 0.0, &mut rng).unwrap();
        assert_eq!(c1, a);
        assert_eq!(c2, b);
    }

    #[test]
    fn crossover_rejects_length_mismatch() {
        let mut rng = seeded_rng(8);
        assert!(matches!(
            crossover(&[0.1], &[0.2, 0.3], 1.0, &mut rng),
            Err(GaError::DimensionMismatch(1, 2))
        ));
    }

    #[test]
    fn mutation_rate_zero_is_identity() {
        let config = GaConfig { mutation_rate: 0.0, ..GaConfig::benchmark_defaults(3, 0) };
        let mut rng = seeded_rng(9);
        let c = vec![0.1, 0.5, 0.9];
        assert_eq!(mutate(&c, &mut rng, &config), c);
    }

    #[test]
    fn mutation_always_respects_bounds() {
        let config = GaConfig { mutation_rate: 1.0, ..GaConfig::benchmark_defaults(4, 0) };
        let mut rng = seeded_rng(10);
        for _ in 0..200 {
            let mutated = mutate(&[0.0, 1.0, 0.5, 0.25], &mut rng, &config);
            assert!(mutated.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn mutation_frequency_matches_the_rate() {
        // oracle: binomial confidence interval around rate * trials
        let config = GaConfig::benchmark_defaults(1, 0); // rate 0.1
        let mut rng = seeded_rng(12);
        let trials = 10_000;
        let mut perturbed = 0;
        for _ in 0..trials {
            let m = mutate(&[0.5], &mut rng, &config);
            if m[0] != 0.5 {
                perturbed += 1;
            }
        }
        let expected = config.mutation_rate * trials as f64;
        let sigma = (trials as f64 * config.mutation_rate * (1.0 - config.mutation_rate)).sqrt();
        assert!(
            (perturbed as f64 - expected).abs() < 3.0 * sigma,
            "{perturbed} perturbations for expected {expected} (sigma {sigma})"
        );
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut config = GaConfig::benchmark_defaults(1, 0);
        config.population_size = 1;
        assert!(config.validate().is_err());
        let mut config = GaConfig::benchmark_defaults(1, 0);
        config.elitism_count = 20;
        assert!(config.validate().is_err());
        let mut config = GaConfig::benchmark_defaults(1, 0);
        config.bounds = vec![(1.0, 0.0)];
        assert!(config.validate().is_err());
    }
}
