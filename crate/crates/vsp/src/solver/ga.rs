//! Genetic-algorithm baseline.
//!
//! A chromosome is one gene per instance holding a node index. Fitness is
//! the aggregate average delay plus `penalty_weight` ms for every violated
//! constraint (delay threshold, capacity, anti-affinity — a chromosome is
//! always a total assignment, so the remaining families cannot fire).
//! Evolution is tournament selection, one-point crossover, per-gene
//! uniform-reset mutation, and elitism of one. Initialization is uniformly
//! random on purpose: the baseline is meant to retain the failure mode of
//! an unsuitable initial population rather than be repaired into a second
//! heuristic.
//!
//! The best feasible individual ever seen is returned; if no feasible
//! individual appears in any generation the solve reports infeasibility.

use super::{SolveError, SolveStats, SolverView};
use crate::model::{self, Placement, PlacementProblem, Violation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub crossover_rate: f64,
    /// Per-gene mutation probability; `None` means `1 / |instances|`.
    pub mutation_rate: Option<f64>,
    /// Penalty added to the fitness per constraint violation, in ms.
    pub penalty_weight: f64,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 50,
            generations: 200,
            tournament_size: 3,
            crossover_rate: 0.9,
            mutation_rate: None,
            penalty_weight: 1e5,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        if self.population_size < 2 {
            return Err(SolveError::InvalidConfig("population_size must be at least 2".into()));
        }
        if self.tournament_size < 1 {
            return Err(SolveError::InvalidConfig("tournament_size must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return Err(SolveError::InvalidConfig("crossover_rate must lie in [0, 1]".into()));
        }
        if let Some(m) = self.mutation_rate {
            if !(0.0..=1.0).contains(&m) {
                return Err(SolveError::InvalidConfig("mutation_rate must lie in [0, 1]".into()));
            }
        }
        if !(self.penalty_weight > 0.0) {
            return Err(SolveError::InvalidConfig("penalty_weight must be positive".into()));
        }
        Ok(())
    }
}

pub fn solve_ga(
    problem: &PlacementProblem,
    config: &GaConfig,
) -> Result<(Placement, SolveStats), SolveError> {
    let start = Instant::now();
    let run = evolve(problem, config)?;
    debug_assert!(
        run.best_penalized_by_generation.windows(2).all(|w| w[1] <= w[0]),
        "elitism keeps the best-ever fitness non-increasing"
    );
    match run.best_feasible {
        Some(genes) => {
            let placement = Placement::from_indices(problem, &run.view_stats, &genes);
            Ok((
                placement,
                SolveStats {
                    nodes_explored: run.evaluations,
                    runtime_ms: start.elapsed().as_secs_f64() * 1e3,
                    proven_optimal: false,
                },
            ))
        }
        None => Err(SolveError::Infeasible),
    }
}

pub(crate) struct GaRun {
    pub best_feasible: Option<Vec<usize>>,
    pub evaluations: u64,
    /// Best penalized fitness seen up to and including each generation
    /// (generation 0 is the initial population).
    pub best_penalized_by_generation: Vec<f64>,
    pub view_stats: crate::model::DelayStats,
}

pub(crate) fn evolve(problem: &PlacementProblem, config: &GaConfig) -> Result<GaRun, SolveError> {
    config.validate()?;
    let view = SolverView::new(problem)?;
    let node_max = model::max_delay_per_node(problem);
    let n_genes = problem.instances().len();
    let n_nodes = problem.nodes().len();
    let mutation_rate = config.mutation_rate.unwrap_or(if n_genes == 0 { 0.0 } else { 1.0 / n_genes as f64 });

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut evaluations: u64 = 0;

    let score = |genes: &[usize], evaluations: &mut u64| -> (f64, bool) {
        *evaluations += 1;
        let slots: Vec<Option<usize>> = genes.iter().map(|&g| Some(g)).collect();
        let report = model::check_with_node_max(problem, &node_max, &slots);
        let violations = report.count_of(|v| {
            matches!(
                v,
                Violation::DelayThresholdExceeded { .. }
                    | Violation::CapacityExceeded { .. }
                    | Violation::AntiAffinityViolated { .. }
            )
        });
        let objective = view.stats.objective_ms(problem, genes);
        (objective + config.penalty_weight * violations as f64, violations == 0)
    };

    let random_genes = |rng: &mut ChaCha8Rng| -> Vec<usize> {
        (0..n_genes).map(|_| rng.random_range(0..n_nodes.max(1))).collect()
    };

    let mut population: Vec<Vec<usize>> =
        (0..config.population_size).map(|_| random_genes(&mut rng)).collect();
    let mut fitness: Vec<f64> = Vec::with_capacity(config.population_size);

    let mut best_feasible: Option<(f64, Vec<usize>)> = None;
    let mut best_ever = f64::INFINITY;
    let mut best_penalized_by_generation = Vec::with_capacity(config.generations + 1);

    let assess = |population: &[Vec<usize>],
                      fitness: &mut Vec<f64>,
                      best_feasible: &mut Option<(f64, Vec<usize>)>,
                      evaluations: &mut u64| {
        fitness.clear();
        for genes in population {
            let (penalized, feasible) = score(genes, evaluations);
            fitness.push(penalized);
            if feasible {
                let better = best_feasible.as_ref().is_none_or(|(obj, _)| penalized < *obj);
                if better {
                    *best_feasible = Some((penalized, genes.clone()));
                }
            }
        }
    };

    assess(&population, &mut fitness, &mut best_feasible, &mut evaluations);
    best_ever = best_ever.min(fitness.iter().cloned().fold(f64::INFINITY, f64::min));
    best_penalized_by_generation.push(best_ever);

    for _generation in 0..config.generations {
        let elite = fitness
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite fitness"))
            .map(|(i, _)| i)
            .expect("population is non-empty");

        let tournament = |rng: &mut ChaCha8Rng| -> usize {
            let mut best = rng.random_range(0..population.len());
            for _ in 1..config.tournament_size {
                let challenger = rng.random_range(0..population.len());
                if fitness[challenger] < fitness[best] {
                    best = challenger;
                }
            }
            best
        };

        let mut next: Vec<Vec<usize>> = Vec::with_capacity(config.population_size);
        next.push(population[elite].clone());
        while next.len() < config.population_size {
            let p1 = tournament(&mut rng);
            let p2 = tournament(&mut rng);
            let mut child = if n_genes >= 2 && rng.random_bool(config.crossover_rate) {
                let point = rng.random_range(1..n_genes);
                let mut genes = population[p1][..point].to_vec();
                genes.extend_from_slice(&population[p2][point..]);
                genes
            } else {
                population[p1].clone()
            };
            for gene in &mut child {
                if rng.random_bool(mutation_rate) {
                    *gene = rng.random_range(0..n_nodes.max(1));
                }
            }
            next.push(child);
        }

        population = next;
        assess(&population, &mut fitness, &mut best_feasible, &mut evaluations);
        best_ever = best_ever.min(fitness.iter().cloned().fold(f64::INFINITY, f64::min));
        best_penalized_by_generation.push(best_ever);
    }

    Ok(GaRun {
        best_feasible: best_feasible.map(|(_, genes)| genes),
        evaluations,
        best_penalized_by_generation,
        view_stats: view.stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::check_feasibility;
    use crate::scenario::{builtin_scenario, instantiate, Scenario};

    #[test]
    fn single_admissible_node_converges_immediately() {
        let problem = instantiate(&builtin_scenario(Scenario::Small, 20, 3).unwrap()).unwrap();
        // Strip the scenario down to one instance and one node by solving a
        // custom problem instead: a single type, a single node.
        let problem = crate::model::PlacementProblem::new(
            vec![problem.types()[0].clone()],
            vec![problem.instances()[0].clone()],
            vec![crate::model::ComputeNode {
                id: "rsu-0".into(),
                tier: crate::model::NodeTier::Rsu,
                capacity: crate::model::ResourceVector::new(8.0, 16.0, 240.0),
            }],
            2,
            crate::model::DelayMatrix::new(vec![vec![4.0], vec![6.0]]),
        )
        .unwrap();
        let run = evolve(&problem, &GaConfig { generations: 0, ..GaConfig::default() }).unwrap();
        let genes = run.best_feasible.expect("only genotype is feasible");
        assert_eq!(genes, vec![0]);
    }

    #[test]
    fn best_penalized_fitness_never_increases() {
        for seed in 0..10 {
            let problem = instantiate(&builtin_scenario(Scenario::Small, 40, seed).unwrap()).unwrap();
            let config = GaConfig { seed, generations: 40, ..GaConfig::default() };
            let run = evolve(&problem, &config).unwrap();
            let series = &run.best_penalized_by_generation;
            assert_eq!(series.len(), 41);
            for w in series.windows(2) {
                assert!(w[1] <= w[0], "best-ever fitness rose from {} to {} (seed {seed})", w[0], w[1]);
            }
        }
    }

    #[test]
    fn returned_placements_are_feasible_and_deterministic() {
        let problem = instantiate(&builtin_scenario(Scenario::Small, 40, 11).unwrap()).unwrap();
        let config = GaConfig { seed: 99, ..GaConfig::default() };
        let (a, _) = solve_ga(&problem, &config).unwrap();
        let (b, _) = solve_ga(&problem, &config).unwrap();
        assert_eq!(a, b);
        assert!(check_feasibility(&problem, &a).unwrap().is_feasible());
    }
}
