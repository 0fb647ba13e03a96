mod common;

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use mechscene::corpus::{sample_bank, SliceBank};
use mechscene::evaluators::{Approach, DimensionVector, Evaluation, Evaluator};
use mechscene::experiment::{run_experiment, ExperimentConfig};
use mechscene::scene::{entropy_fitness, Scene, Slice, Tile};
use mechscene::search::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Cheap stand-in for the agents: feasible scenes have no enemies,
/// constraint falls with the enemy count, dims come from tile counts.
struct Fake {
    approach: Approach,
    calls: AtomicU64,
    noisy: bool,
}

impl Fake {
    fn new(approach: Approach) -> Fake {
        Fake {
            approach,
            calls: AtomicU64::new(0),
            noisy: false,
        }
    }
}

impl Evaluator for Fake {
    fn approach(&self) -> Approach {
        self.approach
    }

    fn evaluate(&self, scene: &Scene, salt: u64) -> Evaluation {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let enemies = scene.count(Tile::is_enemy) as f64;
        let noise = if self.noisy { (salt % 3) as f64 * 0.01 } else { 0.0 };
        let constraint = if enemies == 0.0 { 1.0 } else { 1.0 / (1.0 + enemies) - noise };
        let coins = scene.count(|t| t == Tile::Coin || t == Tile::CoinBlock);
        let bricks = scene.count(|t| t == Tile::Breakable);
        Evaluation {
            constraint,
            satisfied: constraint == 1.0,
            fitness: entropy_fitness(scene).fitness,
            dims: Some(DimensionVector::from_index((coins % 4 + 4 * (bricks % 4) + 16 * (enemies as usize % 4)) as u8)),
        }
    }

    fn is_deterministic(&self) -> bool {
        !self.noisy
    }
}

fn bank() -> SliceBank {
    sample_bank(14).unwrap()
}

fn arb_genes(len: usize) -> impl Strategy<Value = Vec<Slice>> {
    let entries: Vec<Slice> = bank().entries().iter().map(|e| e.0.clone()).collect();
    prop::collection::vec(prop::sample::select(entries), len)
}

fn multiset(genes: &[Slice]) -> HashMap<&Slice, usize> {
    let mut m = HashMap::new();
    for g in genes {
        *m.entry(g).or_default() += 1;
    }
    m
}

proptest! {
    #[test]
    fn crossover_preserves_length_and_multiset(a in arb_genes(14), b in arb_genes(14), seed in any::<u64>()) {
        let (x, y) = crossover(&a, &b, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(x.len(), 14);
        prop_assert_eq!(y.len(), 14);
        let parents: Vec<Slice> = a.iter().chain(&b).cloned().collect();
        let children: Vec<Slice> = x.iter().chain(&y).cloned().collect();
        prop_assert_eq!(multiset(&parents), multiset(&children));
        for k in 0..14 {
            prop_assert!((x[k] == a[k] && y[k] == b[k]) || (x[k] == b[k] && y[k] == a[k]));
        }
    }

    #[test]
    fn mutation_changes_at_most_one_position(a in arb_genes(14), seed in any::<u64>()) {
        let bank = bank();
        let mut m = a.clone();
        let pos = mutate(&mut m, &bank, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(m.len(), a.len());
        for k in 0..14 {
            if k != pos {
                prop_assert_eq!(&m[k], &a[k]);
            }
        }
        prop_assert!(bank.count_of(&m[pos]) > 0);
    }

    #[test]
    fn breeding_keeps_length(a in arb_genes(14), b in arb_genes(14), seed in any::<u64>()) {
        let [x, y] = Variation::default().breed(&a, &b, &bank(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(x.len(), 14);
        prop_assert_eq!(y.len(), 14);
    }
}

#[test]
fn mutation_position_is_uniform() {
    let bank = bank();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut genes = vec![Slice::floor(14); 14];
    let mut hits = [0u64; 14];
    for _ in 0..10_000 {
        hits[mutate(&mut genes, &bank, &mut rng).unwrap()] += 1;
    }
    let stat = common::chi_square(&hits, &[10_000.0 / 14.0; 14]);
    let critical = ChiSquared::new(13.0).unwrap().inverse_cdf(0.999);
    assert!(stat < critical, "{stat} >= {critical}");
}

fn fi2pop_run(seed: u64, generations: u32) -> Vec<Fi2PopState> {
    let fake = Fake::new("punishing:coin".parse().unwrap());
    let mut evals = Evaluations::new(&fake, 3, None);
    let config = Fi2PopConfig {
        population: 20,
        core_width: 14,
        variation: Variation::default(),
    };
    let bank = bank();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states = vec![Fi2PopState::initial(&config, &mut evals, &bank, &mut rng).unwrap()];
    for _ in 0..generations {
        let next = states.last().unwrap().next(&config, &mut evals, &bank, &mut rng).unwrap();
        states.push(next);
    }
    states
}

#[test]
fn fi2pop_keeps_size_partition_and_elite() {
    let states = fi2pop_run(3, 25);
    let mut best: Option<f64> = None;
    for s in &states {
        assert_eq!(s.len(), 20);
        assert!(s.feasible.iter().all(|c| c.satisfied));
        assert!(s.infeasible.iter().all(|c| !c.satisfied));
        assert!(s.feasible.windows(2).all(|w| w[0].fitness >= w[1].fitness));
        assert!(s.infeasible.windows(2).all(|w| w[0].normalized >= w[1].normalized));
        if let Some(b) = best {
            let now = s.feasible.first().expect("elite survives").fitness;
            assert!(now >= b);
        }
        best = s.feasible.first().map(|c| c.fitness).or(best);
    }
    assert!(best.is_some());
}

#[test]
fn fi2pop_is_seed_deterministic() {
    assert_eq!(fi2pop_run(9, 6), fi2pop_run(9, 6));
    assert_ne!(fi2pop_run(9, 6), fi2pop_run(10, 6));
}

#[test]
fn quotas_are_proportional_with_floor_of_one() {
    let c = |satisfied| Chromosome {
        satisfied,
        ..Chromosome::unevaluated(vec![Slice::floor(14)])
    };
    let mixed = |f: usize, i: usize| {
        let members = (0..f).map(|_| c(true)).chain((0..i).map(|_| c(false))).collect();
        Fi2PopState::from_members(members, 0)
    };
    assert_eq!(mixed(1, 99).quotas(100), (1, 99));
    assert_eq!(mixed(99, 1).quotas(100), (99, 1));
    assert_eq!(mixed(50, 50).quotas(100), (50, 50));
    assert_eq!(mixed(0, 10).quotas(100), (0, 100));
    assert_eq!(mixed(10, 0).quotas(100), (100, 0));
    for f in 1..100 {
        let (a, b) = mixed(f, 100 - f).quotas(100);
        assert_eq!(a + b, 100);
        assert!(a >= 1 && b >= 1);
    }
}

fn chromosome(satisfied: bool, fitness: f64, normalized: f64, cell: u8) -> Chromosome {
    Chromosome {
        satisfied,
        fitness,
        normalized,
        constraint: normalized,
        dims: Some(DimensionVector::from_index(cell)),
        eval_count: 1,
        ..Chromosome::unevaluated(vec![Slice::floor(14)])
    }
}

#[test]
fn cme_replacement_rules() {
    let mut map = CmeState::default();
    map.place(chromosome(true, 0.5, 1.0, 3), 20);
    map.place(chromosome(true, 0.5, 1.0, 3), 20);
    map.place(chromosome(true, 0.4, 1.0, 3), 20);
    assert_eq!(map.cells[&3].feasible.as_ref().unwrap().fitness, 0.5);
    map.place(chromosome(true, 0.6, 1.0, 3), 20);
    assert_eq!(map.cells[&3].feasible.as_ref().unwrap().fitness, 0.6);
    for k in 0..30 {
        map.place(chromosome(false, 0.9, k as f64 / 30.0, 7), 20);
    }
    let cell = &map.cells[&7];
    assert_eq!(cell.infeasible.len(), 20);
    assert!(cell.feasible.is_none());
    // The ten weakest were dropped.
    assert_eq!(cell.infeasible.last().unwrap().normalized, 10.0 / 30.0);
    assert!(cell.infeasible.windows(2).all(|w| w[0].normalized >= w[1].normalized));
    assert_eq!(map.elites(), 1);
    assert_eq!(map.occupied(), 2);
}

fn cme_run(seed: u64, iterations: u32, workers: Option<&rayon::ThreadPool>) -> Vec<CmeState> {
    let fake = Fake::new(Approach::MechanicsDimensions);
    let mut evals = Evaluations::new(&fake, 3, workers);
    let config = CmeConfig {
        seeds: 40,
        offspring: 40,
        infeasible_capacity: 20,
        core_width: 14,
        variation: Variation::default(),
    };
    let bank = bank();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states = vec![CmeState::seeded(&config, &mut evals, &bank, &mut rng).unwrap()];
    for _ in 0..iterations {
        let next = states.last().unwrap().next(&config, &mut evals, &bank, &mut rng).unwrap();
        states.push(next);
    }
    states
}

#[test]
fn cme_respects_capacity_and_never_loses_elites() {
    let states = cme_run(4, 30, None);
    for w in states.windows(2) {
        assert!(w[1].elites() >= w[0].elites());
        for (index, cell) in &w[0].cells {
            if let Some(old) = &cell.feasible {
                assert!(w[1].cells[index].feasible.as_ref().unwrap().fitness >= old.fitness);
            }
        }
    }
    for s in &states {
        for (index, cell) in &s.cells {
            assert!(cell.infeasible.len() <= 20);
            assert!(*index < CME_CELLS);
            for c in cell.feasible.iter().chain(&cell.infeasible) {
                assert_eq!(c.dims.unwrap().index(), *index);
            }
        }
    }
    assert!(states.last().unwrap().occupied() > 5);
}

#[test]
fn parallel_evaluation_matches_serial() {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    assert_eq!(cme_run(12, 5, None), cme_run(12, 5, Some(&pool)));
}

#[test]
fn deterministic_memo_evaluates_each_genotype_once() {
    let fake = Fake::new(Approach::MechanicsDimensions);
    let mut evals = Evaluations::new(&fake, 3, None);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let g = random_genes(14, &bank(), &mut rng).unwrap();
    let out = evals.evaluate(vec![g.clone(), g.clone(), g.clone()], &mut rng);
    evals.evaluate(vec![g.clone()], &mut rng);
    assert_eq!(fake.calls.load(Ordering::Relaxed), 1);
    assert_eq!(evals.count, 1);
    assert_eq!(out[0], out[2]);
}

#[test]
fn stochastic_memo_keeps_lowest_constraint() {
    let mut fake = Fake::new("punishing:coin".parse().unwrap());
    fake.noisy = true;
    let bank = bank();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let g = loop {
        let g = random_genes(14, &bank, &mut rng).unwrap();
        if Scene::from_core(&g, 3).unwrap().count(Tile::is_enemy) > 0 {
            break g;
        }
    };
    let mut evals = Evaluations::new(&fake, 3, None);
    let mut lowest = f64::INFINITY;
    for _ in 0..12 {
        let c = evals.evaluate(vec![g.clone()], &mut rng).remove(0);
        assert!(c.constraint <= lowest);
        lowest = c.constraint;
    }
    assert_eq!(fake.calls.load(Ordering::Relaxed), 12);
    let base = 1.0 / (1.0 + Scene::from_core(&g, 3).unwrap().count(Tile::is_enemy) as f64);
    assert_eq!(lowest, base - 0.02);
}

#[test]
fn smoke_run_matches_golden_stats() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = ExperimentConfig::parse(include_str!("../../../presets/smoke.conf")).unwrap();
    config.output_dir = dir.path().join("smoke");
    let summary = run_experiment(&config).unwrap();
    let csv = std::fs::read_to_string(summary.dir.join("stats.csv")).unwrap();
    let golden = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/smoke-stats.csv");
    if std::env::var_os("MECHSCENE_BLESS").is_some() {
        std::fs::write(&golden, &csv).unwrap();
    }
    let expected = std::fs::read_to_string(&golden).expect("golden file; set MECHSCENE_BLESS=1 to create it");
    assert_eq!(csv, expected);
    assert_eq!(summary.stats.len(), 5);
}
