use std::cmp::Ordering;

use rand::Rng;

use super::{rank_select, random_genes, Chromosome, Evaluations, StatsRow, Variation};
use crate::corpus::{CorpusError, SliceBank};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fi2PopConfig {
    pub population: usize,
    pub core_width: usize,
    pub variation: Variation,
}

/// Two populations: feasible ranked by fitness, infeasible ranked by
/// normalized constraint, both best first.
#[derive(Debug, Clone, PartialEq)]
pub struct Fi2PopState {
    pub feasible: Vec<Chromosome>,
    pub infeasible: Vec<Chromosome>,
    pub generation: u32,
}

fn by_fitness(a: &Chromosome, b: &Chromosome) -> Ordering {
    b.fitness.total_cmp(&a.fitness)
}

fn by_constraint(a: &Chromosome, b: &Chromosome) -> Ordering {
    b.normalized.total_cmp(&a.normalized)
}

impl Fi2PopState {
    /// Random initial population, evaluated.
    pub fn initial<R: Rng + ?Sized>(
        config: &Fi2PopConfig,
        evals: &mut Evaluations,
        bank: &SliceBank,
        rng: &mut R,
    ) -> Result<Fi2PopState, CorpusError> {
        let genes = (0..config.population)
            .map(|_| random_genes(config.core_width, bank, rng))
            .collect::<Result<Vec<_>, _>>()?;
        let members = evals.evaluate(genes, rng);
        Ok(Fi2PopState::from_members(members, 0))
    }

    /// Splits and ranks. Sorting is stable, so equal chromosomes keep their
    /// input order.
    pub fn from_members(members: Vec<Chromosome>, generation: u32) -> Fi2PopState {
        let (mut feasible, mut infeasible): (Vec<_>, Vec<_>) = members.into_iter().partition(|c| c.satisfied);
        feasible.sort_by(by_fitness);
        infeasible.sort_by(by_constraint);
        Fi2PopState {
            feasible,
            infeasible,
            generation,
        }
    }

    pub fn len(&self) -> usize {
        self.feasible.len() + self.infeasible.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Best feasible chromosome, or the best infeasible one.
    pub fn elite(&self) -> Option<&Chromosome> {
        self.feasible.first().or(self.infeasible.first())
    }

    /// Offspring quotas for the two populations, proportional to their
    /// sizes with at least one each when non-empty.
    pub fn quotas(&self, offspring: usize) -> (usize, usize) {
        let (f, i) = (self.feasible.len(), self.infeasible.len());
        match (f, i) {
            (0, 0) => (0, 0),
            (_, 0) => (offspring, 0),
            (0, _) => (0, offspring),
            _ => {
                let qf = ((offspring * f) as f64 / (f + i) as f64).round() as usize;
                let qf = qf.clamp(1, offspring.saturating_sub(1).max(1));
                (qf, offspring - qf)
            }
        }
    }

    /// One generation: breed, evaluate, re-partition, keep the elite.
    pub fn next<R: Rng + ?Sized>(
        &self,
        config: &Fi2PopConfig,
        evals: &mut Evaluations,
        bank: &SliceBank,
        rng: &mut R,
    ) -> Result<Fi2PopState, CorpusError> {
        let (qf, qi) = self.quotas(config.population);
        let mut children = Vec::with_capacity(config.population);
        for (pool, quota) in [(&self.feasible, qf), (&self.infeasible, qi)] {
            let mut made = Vec::with_capacity(quota + 1);
            while made.len() < quota {
                let a = &pool[rank_select(pool.len(), rng)].genes;
                let b = &pool[rank_select(pool.len(), rng)].genes;
                made.extend(config.variation.breed(a, b, bank, rng)?);
            }
            made.truncate(quota);
            children.extend(made);
        }
        let offspring = evals.evaluate(children, rng);

        let mut next = Fi2PopState::from_members(offspring, self.generation + 1);
        if let Some(elite) = self.elite().cloned() {
            // The elite joins unconditionally; one offspring makes room,
            // taken from the bottom of the infeasible population first.
            if next.len() >= config.population && next.infeasible.pop().is_none() {
                next.feasible.pop();
            }
            if elite.satisfied {
                let at = next.feasible.partition_point(|c| by_fitness(c, &elite) != Ordering::Greater);
                next.feasible.insert(at, elite);
            } else {
                let at = next
                    .infeasible
                    .partition_point(|c| by_constraint(c, &elite) != Ordering::Greater);
                next.infeasible.insert(at, elite);
            }
        }
        Ok(next)
    }

    pub fn stats(&self, evaluations: u64) -> StatsRow {
        StatsRow {
            generation: self.generation,
            best_fitness: self.feasible.first().map(|c| c.fitness),
            best_constraint: self
                .feasible
                .iter()
                .chain(&self.infeasible)
                .map(|c| c.constraint)
                .fold(f64::NEG_INFINITY, f64::max),
            feasible: self.feasible.len(),
            infeasible: self.infeasible.len(),
            elites: usize::from(!self.feasible.is_empty()),
            evaluations,
        }
    }
}
