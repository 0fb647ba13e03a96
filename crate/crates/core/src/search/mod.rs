//! Constrained evolutionary search over scene genotypes.

mod cme;
mod fi2pop;
mod operators;

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;

pub use cme::{CmeCell, CmeConfig, CmeState, CME_CELLS};
pub use fi2pop::{Fi2PopConfig, Fi2PopState};
pub use operators::{crossover, crossover_at, mutate, random_genes, Variation};

use crate::evaluators::{Approach, DimensionVector, Evaluation, Evaluator};
use crate::scene::{Scene, SceneError, Slice};

/// A genotype of core slices and what is known about it.
#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    pub genes: Vec<Slice>,
    /// Lowest constraint value observed.
    pub constraint: f64,
    /// Constraint mapped onto `[0, 1]` for ranking.
    pub normalized: f64,
    pub satisfied: bool,
    pub fitness: f64,
    pub dims: Option<DimensionVector>,
    pub eval_count: u32,
}

impl Chromosome {
    pub fn unevaluated(genes: Vec<Slice>) -> Chromosome {
        Chromosome {
            genes,
            constraint: f64::INFINITY,
            normalized: f64::INFINITY,
            satisfied: false,
            fitness: 0.0,
            dims: None,
            eval_count: 0,
        }
    }

    /// Folds in one evaluation, keeping the lowest constraint seen.
    pub fn record(&mut self, approach: Approach, eval: &Evaluation) {
        if self.eval_count == 0 || eval.constraint < self.constraint {
            self.constraint = eval.constraint;
            self.normalized = approach.normalize(eval.constraint);
            self.satisfied = eval.satisfied;
            self.dims = eval.dims;
        }
        self.fitness = eval.fitness;
        self.eval_count += 1;
    }

    pub fn scene(&self, padding: usize) -> Result<Scene, SceneError> {
        Scene::from_core(&self.genes, padding)
    }
}

/// Shared machinery of both engines: the evaluator, the padding used to
/// build phenotypes, and a memo of every genotype evaluated so far.
pub struct Evaluations<'a> {
    evaluator: &'a dyn Evaluator,
    padding: usize,
    memo: HashMap<Vec<Slice>, Chromosome>,
    pool: Option<&'a rayon::ThreadPool>,
    pub count: u64,
}

impl<'a> Evaluations<'a> {
    pub fn new(evaluator: &'a dyn Evaluator, padding: usize, pool: Option<&'a rayon::ThreadPool>) -> Evaluations<'a> {
        Evaluations {
            evaluator,
            padding,
            memo: HashMap::new(),
            pool,
            count: 0,
        }
    }

    pub fn approach(&self) -> Approach {
        self.evaluator.approach()
    }

    pub fn padding(&self) -> usize {
        self.padding
    }

    /// Evaluates genotypes in parallel and returns them in input order.
    ///
    /// A deterministic evaluator runs once per distinct genotype. A
    /// stochastic one runs every time and the memo keeps the lowest
    /// constraint across runs.
    pub fn evaluate<R: Rng + ?Sized>(&mut self, batch: Vec<Vec<Slice>>, rng: &mut R) -> Vec<Chromosome> {
        let salts: Vec<u64> = batch.iter().map(|_| rng.random()).collect();
        let deterministic = self.evaluator.is_deterministic();
        let mut todo: Vec<usize> = Vec::new();
        let mut pending: HashMap<&[Slice], ()> = HashMap::new();
        for (i, g) in batch.iter().enumerate() {
            let known = deterministic && self.memo.contains_key(g);
            if !known && (!deterministic || pending.insert(g.as_slice(), ()).is_none()) {
                todo.push(i);
            }
        }
        let evaluator = self.evaluator;
        let padding = self.padding;
        let run = || -> Vec<Evaluation> {
            todo.par_iter()
                .map(|&i| {
                    let scene = Scene::from_core(&batch[i], padding).expect("genes share one height");
                    evaluator.evaluate(&scene, salts[i])
                })
                .collect()
        };
        let results = match self.pool {
            Some(pool) => pool.install(run),
            None => run(),
        };
        self.count += results.len() as u64;
        let approach = self.approach();
        for (&i, eval) in todo.iter().zip(&results) {
            let entry = self
                .memo
                .entry(batch[i].clone())
                .or_insert_with(|| Chromosome::unevaluated(batch[i].clone()));
            entry.record(approach, eval);
        }
        batch.into_iter().map(|g| self.memo[&g].clone()).collect()
    }
}

/// One row of the per-generation statistics file.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsRow {
    pub generation: u32,
    /// Best feasible fitness, if any chromosome is feasible.
    pub best_fitness: Option<f64>,
    /// Best raw constraint value in the population or map.
    pub best_constraint: f64,
    pub feasible: usize,
    pub infeasible: usize,
    pub elites: usize,
    pub evaluations: u64,
}

impl StatsRow {
    pub const HEADER: &'static str =
        "generation,best_fitness,best_constraint,feasible,infeasible,elites,evaluations";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.generation,
            self.best_fitness.map_or(String::new(), |f| f.to_string()),
            self.best_constraint,
            self.feasible,
            self.infeasible,
            self.elites,
            self.evaluations
        )
    }

    pub fn parse_csv(line: &str) -> Option<StatsRow> {
        let f: Vec<&str> = line.trim().split(',').collect();
        let [generation, best_fitness, best_constraint, feasible, infeasible, elites, evaluations] = f[..] else {
            return None;
        };
        Some(StatsRow {
            generation: generation.parse().ok()?,
            best_fitness: if best_fitness.is_empty() {
                None
            } else {
                Some(best_fitness.parse().ok()?)
            },
            best_constraint: best_constraint.parse().ok()?,
            feasible: feasible.parse().ok()?,
            infeasible: infeasible.parse().ok()?,
            elites: elites.parse().ok()?,
            evaluations: evaluations.parse().ok()?,
        })
    }
}

/// Index drawn with weight `n - rank` for ranks `0..n`.
pub(crate) fn rank_select<R: Rng + ?Sized>(n: usize, rng: &mut R) -> usize {
    let total = n * (n + 1) / 2;
    let mut ticket = rng.random_range(0..total);
    for rank in 0..n {
        let w = n - rank;
        if ticket < w {
            return rank;
        }
        ticket -= w;
    }
    n - 1
}
