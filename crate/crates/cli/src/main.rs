use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use mechscene::agent::{make_agent, AStarAgent, AgentKind, DEFAULT_NODE_BUDGET};
use mechscene::corpus::{extract_slices, raw_column_stats, read_corpus_dir, SymbolMapping};
use mechscene::engine::{simulate, wrap_punishing, Engine, MechanicKind, RunLimits};
use mechscene::evaluators::extract_dimensions;
use mechscene::experiment::{run_experiment, ExperimentConfig};
use mechscene::scene::{entropy_fitness, Scene, Tile, DEFAULT_HEIGHT};
use mechscene::search::StatsRow;

#[derive(Parser)]
#[command(name = "mechscene", version, about = "Evolve platformer scenes around game mechanics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Harvest slices from a directory of level files.
    ExtractCorpus {
        corpus_dir: PathBuf,
        /// Symbol mapping applied before parsing.
        #[arg(long)]
        mapping: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_HEIGHT)]
        height: usize,
        /// Write the slice bank here instead of standard output.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Run an experiment and write its run directory.
    Generate {
        /// Config file of `key = value` lines.
        #[arg(long, short)]
        config: Option<PathBuf>,
        /// Extra `key=value` overrides, applied after the file.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        corpus_dir: Option<PathBuf>,
        #[arg(long)]
        node_budget: Option<usize>,
        /// Parallel evaluations.
        #[arg(long)]
        workers: Option<usize>,
        /// Draw each evaluation's node budget from `budget ± N`.
        #[arg(long, value_name = "N")]
        stochastic_budget: Option<usize>,
    },
    /// Print a scene with a legend.
    Render { scene: PathBuf },
    /// Play a scene and print the trace. Exits 0 on a win, 2 on a loss.
    Replay {
        scene: PathBuf,
        #[arg(long, default_value = "perfect")]
        agent: String,
        /// Plan with a model that punishes this mechanic.
        #[arg(long)]
        punish: Option<String>,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        node_budget: usize,
        /// Accepted for scripting symmetry; the agent is deterministic.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Summarise a run directory or stats file.
    Stats { path: PathBuf },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_scene(path: &Path) -> Result<Scene> {
    Scene::parse(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn extract_corpus(dir: &Path, mapping: Option<&Path>, height: usize, output: Option<&Path>) -> Result<()> {
    let mut levels = read_corpus_dir(dir)?;
    if levels.is_empty() {
        bail!("no .txt levels in {}", dir.display());
    }
    let (raw_total, raw_unique) = raw_column_stats(levels.iter().map(|(_, t)| t.as_str()));
    if let Some(path) = mapping {
        let m = SymbolMapping::parse(&read(path)?)?;
        for (_, t) in &mut levels {
            *t = m.apply(t);
        }
    }
    let bank = extract_slices(levels.iter().map(|(n, t)| (n.as_str(), t.as_str())), height)?;
    let summary = format!(
        "levels {}\ntotal {}\nunique {}\nraw-unique {}\n",
        levels.len(),
        bank.total(),
        bank.unique(),
        raw_unique
    );
    debug_assert_eq!(raw_total as u64, bank.total());
    match output {
        Some(path) => {
            fs::write(path, bank.to_text()).with_context(|| format!("writing {}", path.display()))?;
            print!("{summary}");
        }
        None => {
            print!("{}", bank.to_text());
            eprint!("{summary}");
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn generate(
    config: Option<&Path>,
    overrides: &[String],
    seed: Option<u64>,
    output: Option<PathBuf>,
    corpus_dir: Option<PathBuf>,
    node_budget: Option<usize>,
    workers: Option<usize>,
    stochastic_budget: Option<usize>,
) -> Result<()> {
    let mut c = ExperimentConfig::default();
    if let Some(path) = config {
        c.apply_text(&read(path)?)
            .with_context(|| format!("in {}", path.display()))?;
    }
    for o in overrides {
        let (k, v) = o
            .split_once('=')
            .with_context(|| format!("override '{o}' is not KEY=VALUE"))?;
        c.set(k, v)?;
    }
    if let Some(s) = seed {
        c.seed = s;
    }
    if let Some(o) = output {
        c.output_dir = o;
    }
    if corpus_dir.is_some() {
        c.corpus_dir = corpus_dir;
    }
    if let Some(b) = node_budget {
        c.node_budget = b;
    }
    if let Some(w) = workers {
        c.workers = w;
    }
    if let Some(s) = stochastic_budget {
        c.budget_spread = s;
    }
    let summary = run_experiment(&c)?;
    let last = summary.stats.last().expect("at least the initial row");
    println!("run directory {}", summary.dir.display());
    println!("generations {}", last.generation);
    println!("evaluations {}", last.evaluations);
    println!("feasible {}", summary.feasible);
    println!(
        "best fitness {}",
        last.best_fitness.map_or("none".to_string(), |f| format!("{f:.6}"))
    );
    Ok(())
}

fn render(path: &Path) -> Result<()> {
    let scene = load_scene(path)?;
    print!("{}", scene.serialize());
    let present: BTreeSet<char> = scene.tiles().map(Tile::symbol).collect();
    println!();
    println!("legend:");
    for t in Tile::ALL.iter().filter(|t| present.contains(&t.symbol())) {
        println!("  {}  {}", t.symbol(), t.description());
    }
    let f = entropy_fitness(&scene);
    println!(
        "width {} (core {}, padding {}), fitness {:.6}",
        scene.width(),
        scene.core_width(),
        scene.padding(),
        f.fitness
    );
    Ok(())
}

fn replay(path: &Path, agent: &str, punish: Option<&str>, node_budget: usize) -> Result<bool> {
    let scene = load_scene(path)?;
    let kind: AgentKind = agent.parse()?;
    let engine = Engine::default();
    let mut config = make_agent(kind, engine.clone()).with_budget(node_budget);
    config.validate()?;
    if let Some(m) = punish {
        let m: MechanicKind = m.parse()?;
        config.model = wrap_punishing(config.model.clone(), m)?;
    }
    let mut policy = AStarAgent::new(config);
    let p = simulate(&scene, &mut policy, RunLimits::for_scene(&scene), &engine);
    print!("{}", p.to_trace());
    println!("dimensions {}", extract_dimensions(&p));
    Ok(p.won)
}

fn stats(path: &Path) -> Result<()> {
    let file = if path.is_dir() { path.join("stats.csv") } else { path.to_path_buf() };
    let text = read(&file)?;
    let mut lines = text.lines();
    if lines.next() != Some(StatsRow::HEADER) {
        bail!("{} is not a stats file", file.display());
    }
    let rows = lines
        .enumerate()
        .map(|(i, l)| StatsRow::parse_csv(l).with_context(|| format!("line {}", i + 2)))
        .collect::<Result<Vec<_>>>()?;
    let Some(last) = rows.last() else {
        bail!("{} has no rows", file.display());
    };
    let first_feasible = rows.iter().find(|r| r.feasible > 0).map(|r| r.generation);
    let elites_monotone = rows.windows(2).all(|w| w[1].elites >= w[0].elites);
    println!("rows {}", rows.len());
    println!("last generation {}", last.generation);
    println!("evaluations {}", last.evaluations);
    println!(
        "best fitness {}",
        last.best_fitness.map_or("none".to_string(), |f| format!("{f:.6}"))
    );
    println!("best constraint {:.6}", last.best_constraint);
    println!("feasible {}", last.feasible);
    println!("elites {}", last.elites);
    println!(
        "first feasible generation {}",
        first_feasible.map_or("none".to_string(), |g| g.to_string())
    );
    println!("elites nondecreasing {elites_monotone}");
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::ExtractCorpus {
            corpus_dir,
            mapping,
            height,
            output,
        } => extract_corpus(&corpus_dir, mapping.as_deref(), height, output.as_deref())?,
        Command::Generate {
            config,
            overrides,
            seed,
            output,
            corpus_dir,
            node_budget,
            workers,
            stochastic_budget,
        } => generate(
            config.as_deref(),
            &overrides,
            seed,
            output,
            corpus_dir,
            node_budget,
            workers,
            stochastic_budget,
        )?,
        Command::Render { scene } => render(&scene)?,
        Command::Replay {
            scene,
            agent,
            punish,
            node_budget,
            seed: _,
        } => {
            let won = replay(&scene, &agent, punish.as_deref(), node_budget)?;
            return Ok(if won { ExitCode::SUCCESS } else { ExitCode::from(2) });
        }
        Command::Stats { path } => stats(&path)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
