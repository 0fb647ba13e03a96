use std::collections::BTreeMap;

use rand::Rng;

use super::{random_genes, Chromosome, Evaluations, StatsRow, Variation};
use crate::corpus::{CorpusError, SliceBank};

pub const CME_CELLS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CmeConfig {
    /// Random chromosomes placed before the first iteration.
    pub seeds: usize,
    /// Children per iteration.
    pub offspring: usize,
    pub infeasible_capacity: usize,
    pub core_width: usize,
    pub variation: Variation,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CmeCell {
    pub feasible: Option<Chromosome>,
    /// Best first by normalized constraint.
    pub infeasible: Vec<Chromosome>,
}

impl CmeCell {
    pub fn is_empty(&self) -> bool {
        self.feasible.is_none() && self.infeasible.is_empty()
    }

    /// A feasible member if there is one, else a uniform infeasible one.
    fn parent<R: Rng + ?Sized>(&self, rng: &mut R) -> &Chromosome {
        match &self.feasible {
            Some(c) => c,
            None => &self.infeasible[rng.random_range(0..self.infeasible.len())],
        }
    }
}

/// The map: one cell per dimension vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CmeState {
    pub cells: BTreeMap<usize, CmeCell>,
    pub iteration: u32,
}

impl CmeState {
    /// Seeds an empty map with random chromosomes.
    pub fn seeded<R: Rng + ?Sized>(
        config: &CmeConfig,
        evals: &mut Evaluations,
        bank: &SliceBank,
        rng: &mut R,
    ) -> Result<CmeState, CorpusError> {
        let genes = (0..config.seeds)
            .map(|_| random_genes(config.core_width, bank, rng))
            .collect::<Result<Vec<_>, _>>()?;
        let mut state = CmeState::default();
        for c in evals.evaluate(genes, rng) {
            state.place(c, config.infeasible_capacity);
        }
        Ok(state)
    }

    /// Files a chromosome under its dimension vector. A feasible one takes
    /// over the cell only with strictly higher fitness; infeasible ones
    /// join the cell's repair population, which keeps its best `capacity`.
    pub fn place(&mut self, c: Chromosome, capacity: usize) {
        let index = c.dims.map_or(0, |d| d.index());
        let cell = self.cells.entry(index).or_default();
        if c.satisfied {
            if cell.feasible.as_ref().is_none_or(|e| c.fitness > e.fitness) {
                cell.feasible = Some(c);
            }
        } else {
            let at = cell
                .infeasible
                .partition_point(|m| m.normalized >= c.normalized);
            cell.infeasible.insert(at, c);
            cell.infeasible.truncate(capacity);
        }
    }

    pub fn occupied(&self) -> usize {
        self.cells.values().filter(|c| !c.is_empty()).count()
    }

    pub fn elites(&self) -> usize {
        self.cells.values().filter(|c| c.feasible.is_some()).count()
    }

    /// One iteration: children from parents in uniformly chosen occupied
    /// cells, evaluated, then placed in offspring order.
    pub fn next<R: Rng + ?Sized>(
        &self,
        config: &CmeConfig,
        evals: &mut Evaluations,
        bank: &SliceBank,
        rng: &mut R,
    ) -> Result<CmeState, CorpusError> {
        let occupied: Vec<&CmeCell> = self.cells.values().filter(|c| !c.is_empty()).collect();
        let mut next = self.clone();
        next.iteration += 1;
        if occupied.is_empty() {
            return Ok(next);
        }
        let mut children = Vec::with_capacity(config.offspring + 1);
        while children.len() < config.offspring {
            let a = &occupied[rng.random_range(0..occupied.len())].parent(rng).genes;
            let b = &occupied[rng.random_range(0..occupied.len())].parent(rng).genes;
            children.extend(config.variation.breed(a, b, bank, rng)?);
        }
        children.truncate(config.offspring);
        for c in evals.evaluate(children, rng) {
            next.place(c, config.infeasible_capacity);
        }
        Ok(next)
    }

    pub fn stats(&self, evaluations: u64) -> StatsRow {
        let members = self
            .cells
            .values()
            .flat_map(|c| c.feasible.iter().chain(&c.infeasible));
        StatsRow {
            generation: self.iteration,
            best_fitness: self
                .cells
                .values()
                .filter_map(|c| c.feasible.as_ref().map(|e| e.fitness))
                .reduce(f64::max),
            best_constraint: members.map(|c| c.constraint).fold(f64::NEG_INFINITY, f64::max),
            feasible: self.elites(),
            infeasible: self.cells.values().map(|c| c.infeasible.len()).sum(),
            elites: self.elites(),
            evaluations,
        }
    }
}
