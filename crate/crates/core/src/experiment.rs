//! Experiment configuration and seeded runs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::agent::DEFAULT_NODE_BUDGET;
use crate::corpus::{extract_slices, read_corpus_dir, sample_bank, CorpusError, SliceBank, SymbolMapping};
use crate::engine::{Engine, PhysicsConfig};
use crate::evaluators::{AgentEvaluator, Approach, ApproachError};
use crate::scene::{DEFAULT_CORE_WIDTH, DEFAULT_HEIGHT, DEFAULT_PADDING};
use crate::search::{CmeConfig, CmeState, Evaluations, Fi2PopConfig, Fi2PopState, StatsRow, Variation};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown config key '{0}'")]
    UnknownKey(String),
    #[error("bad value for {key}: '{value}'")]
    BadValue { key: String, value: String },
    #[error("{0} must be positive")]
    NotPositive(&'static str),
    #[error("{0} must lie in [0, 1]")]
    NotProbability(&'static str),
    #[error(transparent)]
    Approach(#[from] ApproachError),
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("io error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub approach: String,
    pub target: Option<String>,
    /// Generations (FI2Pop) or iterations (MAP-Elites).
    pub generations: u32,
    /// Population and offspring size per generation.
    pub population: usize,
    pub seed: u64,
    /// `None` uses the bundled sample corpus.
    pub corpus_dir: Option<PathBuf>,
    /// Optional symbol mapping applied to corpus files.
    pub mapping: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub node_budget: usize,
    pub budget_spread: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub infeasible_capacity: usize,
    pub height: usize,
    pub core_width: usize,
    pub padding: usize,
    pub high_jump_height: f64,
    pub long_jump_distance: f64,
    pub punished_hold_ticks: u32,
    /// Parallel evaluations; 0 lets the pool decide.
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let ph = PhysicsConfig::default();
        ExperimentConfig {
            approach: "mechanics-dimensions".into(),
            target: None,
            generations: 1000,
            population: 100,
            seed: 0,
            corpus_dir: None,
            mapping: None,
            output_dir: PathBuf::from("runs/out"),
            node_budget: DEFAULT_NODE_BUDGET,
            budget_spread: 0,
            crossover_rate: 0.7,
            mutation_rate: 0.3,
            infeasible_capacity: 20,
            height: DEFAULT_HEIGHT,
            core_width: DEFAULT_CORE_WIDTH,
            padding: DEFAULT_PADDING,
            high_jump_height: ph.high_jump_height,
            long_jump_distance: ph.long_jump_distance,
            punished_hold_ticks: ph.punished_hold_ticks,
            workers: 0,
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
    })
}

impl ExperimentConfig {
    /// Sets one `key = value` pair.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        let opt_path = |v: &str| (!v.is_empty()).then(|| PathBuf::from(v));
        match key.trim() {
            "approach" => self.approach = v.to_string(),
            "target" => self.target = (!v.is_empty()).then(|| v.to_string()),
            "generations" => self.generations = parse_value(key, v)?,
            "population" => self.population = parse_value(key, v)?,
            "seed" => self.seed = parse_value(key, v)?,
            "corpus_dir" => self.corpus_dir = opt_path(v),
            "mapping" => self.mapping = opt_path(v),
            "output_dir" => self.output_dir = PathBuf::from(v),
            "node_budget" => self.node_budget = parse_value(key, v)?,
            "budget_spread" => self.budget_spread = parse_value(key, v)?,
            "crossover_rate" => self.crossover_rate = parse_value(key, v)?,
            "mutation_rate" => self.mutation_rate = parse_value(key, v)?,
            "infeasible_capacity" => self.infeasible_capacity = parse_value(key, v)?,
            "height" => self.height = parse_value(key, v)?,
            "core_width" => self.core_width = parse_value(key, v)?,
            "padding" => self.padding = parse_value(key, v)?,
            "high_jump_height" => self.high_jump_height = parse_value(key, v)?,
            "long_jump_distance" => self.long_jump_distance = parse_value(key, v)?,
            "punished_hold_ticks" => self.punished_hold_ticks = parse_value(key, v)?,
            "workers" => self.workers = parse_value(key, v)?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`. Blank lines and `#`
    /// comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                message: format!("expected key = value, got '{line}'"),
            })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
        let mut c = ExperimentConfig::default();
        c.apply_text(text)?;
        Ok(c)
    }

    /// Every key, one per line, in a form [`parse`](Self::parse) reads back.
    pub fn to_text(&self) -> String {
        let path = |p: &Option<PathBuf>| p.as_ref().map_or(String::new(), |p| p.display().to_string());
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("approach", self.approach.clone());
        kv("target", self.target.clone().unwrap_or_default());
        kv("generations", self.generations.to_string());
        kv("population", self.population.to_string());
        kv("seed", self.seed.to_string());
        kv("corpus_dir", path(&self.corpus_dir));
        kv("mapping", path(&self.mapping));
        kv("output_dir", self.output_dir.display().to_string());
        kv("node_budget", self.node_budget.to_string());
        kv("budget_spread", self.budget_spread.to_string());
        kv("crossover_rate", self.crossover_rate.to_string());
        kv("mutation_rate", self.mutation_rate.to_string());
        kv("infeasible_capacity", self.infeasible_capacity.to_string());
        kv("height", self.height.to_string());
        kv("core_width", self.core_width.to_string());
        kv("padding", self.padding.to_string());
        kv("high_jump_height", self.high_jump_height.to_string());
        kv("long_jump_distance", self.long_jump_distance.to_string());
        kv("punished_hold_ticks", self.punished_hold_ticks.to_string());
        kv("workers", self.workers.to_string());
        s
    }

    pub fn approach(&self) -> Result<Approach, ConfigError> {
        Ok(Approach::parse(&self.approach, self.target.as_deref())?)
    }

    pub fn validate(&self) -> Result<Approach, ConfigError> {
        let approach = self.approach()?;
        let positive = [
            ("generations", self.generations as usize),
            ("population", self.population),
            ("node_budget", self.node_budget),
            ("infeasible_capacity", self.infeasible_capacity),
            ("height", self.height),
            ("core_width", self.core_width),
            ("padding", self.padding),
            ("punished_hold_ticks", self.punished_hold_ticks as usize),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(ConfigError::NotPositive(name));
        }
        if self.population < 2 {
            return Err(ConfigError::NotPositive("population - 1"));
        }
        for (name, v) in [
            ("high_jump_height", self.high_jump_height),
            ("long_jump_distance", self.long_jump_distance),
        ] {
            if v.is_nan() || v <= 0.0 {
                return Err(ConfigError::NotPositive(name));
            }
        }
        for (name, p) in [("crossover_rate", self.crossover_rate), ("mutation_rate", self.mutation_rate)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(ConfigError::NotProbability(name));
            }
        }
        Ok(approach)
    }

    pub fn engine(&self) -> Engine {
        Engine::new(PhysicsConfig {
            high_jump_height: self.high_jump_height,
            long_jump_distance: self.long_jump_distance,
            punished_hold_ticks: self.punished_hold_ticks,
            ..PhysicsConfig::default()
        })
    }

    /// The slice bank the run samples from.
    pub fn bank(&self) -> Result<SliceBank, CorpusError> {
        let Some(dir) = &self.corpus_dir else {
            return sample_bank(self.height);
        };
        let mut levels = read_corpus_dir(dir)?;
        if let Some(path) = &self.mapping {
            let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
                path: path.clone(),
                source,
            })?;
            let mapping = SymbolMapping::parse(&text)?;
            for (_, level) in &mut levels {
                *level = mapping.apply(level);
            }
        }
        extract_slices(levels.iter().map(|(n, t)| (n.as_str(), t.as_str())), self.height)
    }
}

/// Files written by a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub stats: Vec<StatsRow>,
    /// Feasible scenes written, by file name.
    pub feasible: usize,
    /// Largest repair population any map cell held over the run.
    pub peak_cell_infeasible: usize,
}

fn write(path: &Path, contents: &str) -> Result<(), RunError> {
    fs::write(path, contents).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn mkdir(path: &Path) -> Result<(), RunError> {
    fs::create_dir_all(path).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs FI2Pop or constrained MAP-Elites as the approach requires and
/// writes the run directory:
///
/// - `config.txt`: the resolved configuration
/// - `stats.csv`: one row per generation, plus the initial population as row 0
/// - `best.txt`: best feasible scene, or best infeasible one
/// - `feasible/NNN.txt`: final feasible population (FI2Pop)
/// - `map/NNN.txt`: cell elites by cell index (MAP-Elites)
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunSummary, RunError> {
    let approach = config.validate()?;
    let bank = config.bank()?;
    if bank.is_empty() {
        return Err(CorpusError::EmptyBank.into());
    }
    let mut evaluator = AgentEvaluator::new(approach, config.engine(), config.node_budget);
    evaluator.budget_spread = (config.budget_spread > 0).then_some(config.budget_spread);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))?;
    let mut evals = Evaluations::new(&evaluator, config.padding, Some(&pool));
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let variation = Variation {
        crossover_rate: config.crossover_rate,
        mutation_rate: config.mutation_rate,
    };

    let dir = &config.output_dir;
    mkdir(dir)?;
    write(&dir.join("config.txt"), &config.to_text())?;
    let mut stats = Vec::new();
    let scene_text = |c: &crate::search::Chromosome| {
        c.scene(config.padding)
            .expect("genes come from one bank")
            .serialize()
    };
    let feasible;
    let mut peak_cell_infeasible = 0;

    if approach == Approach::MechanicsDimensions {
        let cme = CmeConfig {
            seeds: config.population,
            offspring: config.population,
            infeasible_capacity: config.infeasible_capacity,
            core_width: config.core_width,
            variation,
        };
        let peak = |s: &CmeState| s.cells.values().map(|c| c.infeasible.len()).max().unwrap_or(0);
        let mut state = CmeState::seeded(&cme, &mut evals, &bank, &mut rng)?;
        stats.push(state.stats(evals.count));
        peak_cell_infeasible = peak(&state);
        for _ in 0..config.generations {
            state = state.next(&cme, &mut evals, &bank, &mut rng)?;
            stats.push(state.stats(evals.count));
            peak_cell_infeasible = peak_cell_infeasible.max(peak(&state));
        }
        let map = dir.join("map");
        mkdir(&map)?;
        let mut best: Option<&crate::search::Chromosome> = None;
        for (index, cell) in &state.cells {
            if let Some(elite) = &cell.feasible {
                write(&map.join(format!("{index:03}.txt")), &scene_text(elite))?;
                if best.is_none_or(|b| elite.fitness > b.fitness) {
                    best = Some(elite);
                }
            }
            if let Some(repair) = cell.infeasible.first() {
                write(&map.join(format!("{index:03}-infeasible.txt")), &scene_text(repair))?;
            }
        }
        if let Some(b) = best {
            write(&dir.join("best.txt"), &scene_text(b))?;
        }
        feasible = state.elites();
    } else {
        let fi2 = Fi2PopConfig {
            population: config.population,
            core_width: config.core_width,
            variation,
        };
        let mut state = Fi2PopState::initial(&fi2, &mut evals, &bank, &mut rng)?;
        stats.push(state.stats(evals.count));
        for _ in 0..config.generations {
            state = state.next(&fi2, &mut evals, &bank, &mut rng)?;
            stats.push(state.stats(evals.count));
        }
        let out = dir.join("feasible");
        mkdir(&out)?;
        for (i, c) in state.feasible.iter().enumerate() {
            write(&out.join(format!("{i:03}.txt")), &scene_text(c))?;
        }
        if let Some(b) = state.elite() {
            write(&dir.join("best.txt"), &scene_text(b))?;
        }
        feasible = state.feasible.len();
    }

    let mut csv = String::from(StatsRow::HEADER);
    csv.push('\n');
    for row in &stats {
        csv.push_str(&row.to_csv());
        csv.push('\n');
    }
    write(&dir.join("stats.csv"), &csv)?;
    Ok(RunSummary {
        dir: dir.clone(),
        stats,
        feasible,
        peak_cell_infeasible,
    })
}
