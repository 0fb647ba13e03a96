use rand::Rng;

use crate::corpus::{CorpusError, SliceBank};
use crate::scene::Slice;

/// Swaps the slice range `[i, j)` between two genotypes.
pub fn crossover_at(a: &[Slice], b: &[Slice], i: usize, j: usize) -> (Vec<Slice>, Vec<Slice>) {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x[i..j].clone_from_slice(&b[i..j]);
    y[i..j].clone_from_slice(&a[i..j]);
    (x, y)
}

/// Two-point crossover with `0 <= i <= j <= len` drawn uniformly.
pub fn crossover<R: Rng + ?Sized>(a: &[Slice], b: &[Slice], rng: &mut R) -> (Vec<Slice>, Vec<Slice>) {
    let n = a.len().min(b.len());
    let p = rng.random_range(0..=n);
    let q = rng.random_range(0..=n);
    crossover_at(a, b, p.min(q), p.max(q))
}

/// Replaces one uniformly chosen slice with a draw from the bank.
/// Returns the mutated position.
pub fn mutate<R: Rng + ?Sized>(genes: &mut [Slice], bank: &SliceBank, rng: &mut R) -> Result<usize, CorpusError> {
    if bank.is_empty() {
        return Err(CorpusError::EmptyBank);
    }
    let pos = rng.random_range(0..genes.len());
    genes[pos] = bank.sample(rng)?.clone();
    Ok(pos)
}

/// Genotype of `len` slices sampled from the bank.
pub fn random_genes<R: Rng + ?Sized>(len: usize, bank: &SliceBank, rng: &mut R) -> Result<Vec<Slice>, CorpusError> {
    (0..len).map(|_| bank.sample(rng).cloned()).collect()
}

/// Crossover and mutation rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Variation {
    pub crossover_rate: f64,
    pub mutation_rate: f64,
}

impl Default for Variation {
    fn default() -> Self {
        Variation {
            crossover_rate: 0.7,
            mutation_rate: 0.3,
        }
    }
}

impl Variation {
    /// Two children from two parents: crossover with `crossover_rate`, then
    /// each child mutated with `mutation_rate`.
    pub fn breed<R: Rng + ?Sized>(
        &self,
        a: &[Slice],
        b: &[Slice],
        bank: &SliceBank,
        rng: &mut R,
    ) -> Result<[Vec<Slice>; 2], CorpusError> {
        let (mut x, mut y) = if rng.random_bool(self.crossover_rate) {
            crossover(a, b, rng)
        } else {
            (a.to_vec(), b.to_vec())
        };
        for child in [&mut x, &mut y] {
            if rng.random_bool(self.mutation_rate) {
                mutate(child, bank, rng)?;
            }
        }
        Ok([x, y])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::Tile;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn genes(tag: Tile, n: usize) -> Vec<Slice> {
        (0..n)
            .map(|i| {
                let mut t = vec![Tile::Empty; 14];
                t[i % 10] = tag;
                t[12] = Tile::Ground;
                t[13] = Tile::Ground;
                Slice::new(t).unwrap()
            })
            .collect()
    }

    #[test]
    fn full_swap_exchanges_parents() {
        let a = genes(Tile::Coin, 14);
        let b = genes(Tile::Breakable, 14);
        let (x, y) = crossover_at(&a, &b, 0, 14);
        assert_eq!(x, b);
        assert_eq!(y, a);
    }

    #[test]
    fn empty_swap_keeps_parents() {
        let a = genes(Tile::Coin, 14);
        let b = genes(Tile::Breakable, 14);
        let (x, y) = crossover_at(&a, &b, 5, 5);
        assert_eq!(x, a);
        assert_eq!(y, b);
    }

    #[test]
    fn single_entry_bank_mutation_is_idempotent() {
        let floor = Slice::floor(14);
        let bank = SliceBank::from_counts([(floor.clone(), 4)]);
        let mut g = vec![floor.clone(); 14];
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        mutate(&mut g, &bank, &mut rng).unwrap();
        assert_eq!(g, vec![floor; 14]);
    }

    #[test]
    fn empty_bank_mutation_errors() {
        let bank = SliceBank::from_counts([]);
        let mut g = vec![Slice::floor(14); 3];
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert!(mutate(&mut g, &bank, &mut rng).is_err());
    }
}
