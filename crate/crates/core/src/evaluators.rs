//! Constraint values and mechanic dimensions of a scene.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::agent::{make_agent, AStarAgent, AgentConfig, AgentKind};
use crate::engine::{
    simulate, wrap_punishing, Engine, MechanicKind, ModelError, Playthrough, RunLimits, PUNISHABLE,
};
use crate::scene::{entropy_fitness, Scene};

/// Mechanics recorded as dimensions, in bit order.
pub const DIMENSIONS: [MechanicKind; 8] = [
    MechanicKind::Jump,
    MechanicKind::HighJump,
    MechanicKind::LongJump,
    MechanicKind::Stomp,
    MechanicKind::ShellKill,
    MechanicKind::FallKill,
    MechanicKind::Mushroom,
    MechanicKind::Coin,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct DimensionVector(u8);

impl DimensionVector {
    pub fn from_bits(bits: [bool; 8]) -> DimensionVector {
        DimensionVector(
            bits.iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | (u8::from(b) << i)),
        )
    }

    pub fn from_index(index: u8) -> DimensionVector {
        DimensionVector(index)
    }

    pub fn bits(self) -> [bool; 8] {
        std::array::from_fn(|i| self.0 >> i & 1 == 1)
    }

    /// Cell index in `0..256`.
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn has(self, kind: MechanicKind) -> bool {
        DIMENSIONS
            .iter()
            .position(|&k| k == kind)
            .is_some_and(|i| self.0 >> i & 1 == 1)
    }
}

impl fmt::Display for DimensionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

pub fn extract_dimensions(trace: &Playthrough) -> DimensionVector {
    DimensionVector::from_bits(DIMENSIONS.map(|k| trace.fired(k)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintReport {
    pub value: f64,
    pub satisfied: bool,
    pub perfect_trace: Playthrough,
    pub limited_trace: Option<Playthrough>,
}

/// 1 when the perfect playthrough wins and the limited one does not,
/// otherwise the distance gap as a fraction of the scene length.
pub fn limited_value(perfect: &Playthrough, limited: &Playthrough, scene_length: f64) -> f64 {
    if perfect.won && !limited.won {
        1.0
    } else {
        (perfect.max_distance - limited.max_distance) / scene_length
    }
}

/// 1 on a win, otherwise the fraction of the scene traversed.
pub fn distance_value(perfect: &Playthrough, scene_length: f64) -> f64 {
    if perfect.won {
        1.0
    } else {
        perfect.max_distance / scene_length
    }
}

/// Plays `config` on `scene` with the default run limits.
pub fn play(scene: &Scene, config: &AgentConfig) -> Playthrough {
    let engine = config.model.engine().clone();
    let mut agent = AStarAgent::new(config.clone());
    simulate(scene, &mut agent, RunLimits::for_scene(scene), &engine)
}

fn two_agent_report(scene: &Scene, limited: &AgentConfig, perfect: &AgentConfig) -> ConstraintReport {
    let perfect_trace = play(scene, perfect);
    let limited_trace = play(scene, limited);
    let value = limited_value(&perfect_trace, &limited_trace, scene.width() as f64);
    ConstraintReport {
        value,
        satisfied: value == 1.0,
        perfect_trace,
        limited_trace: Some(limited_trace),
    }
}

pub fn limited_agents_constraint(scene: &Scene, limited: &AgentConfig, perfect: &AgentConfig) -> ConstraintReport {
    two_agent_report(scene, limited, perfect)
}

/// The limited playthrough comes from the perfect agent planning with a
/// model that treats `mechanic` as fatal.
pub fn punishing_constraint(
    scene: &Scene,
    mechanic: MechanicKind,
    perfect: &AgentConfig,
) -> Result<ConstraintReport, ModelError> {
    let punished = perfect
        .clone()
        .with_model(wrap_punishing(perfect.model.clone(), mechanic)?);
    Ok(two_agent_report(scene, &punished, perfect))
}

pub fn mechanics_constraint(scene: &Scene, perfect: &AgentConfig) -> ConstraintReport {
    let perfect_trace = play(scene, perfect);
    let value = distance_value(&perfect_trace, scene.width() as f64);
    ConstraintReport {
        value,
        satisfied: value == 1.0,
        perfect_trace,
        limited_trace: None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApproachError {
    #[error("unknown approach '{0}' (expected limited-agents, punishing or mechanics-dimensions)")]
    UnknownApproach(String),
    #[error("approach {approach} needs a target")]
    MissingTarget { approach: &'static str },
    #[error("approach {approach} does not accept target '{target}'")]
    BadTarget { approach: &'static str, target: String },
}

/// What a search run is looking for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Approach {
    LimitedAgents(AgentKind),
    Punishing(MechanicKind),
    MechanicsDimensions,
}

impl Approach {
    pub fn name(self) -> &'static str {
        match self {
            Approach::LimitedAgents(_) => "limited-agents",
            Approach::Punishing(_) => "punishing",
            Approach::MechanicsDimensions => "mechanics-dimensions",
        }
    }

    pub fn target(self) -> Option<String> {
        match self {
            Approach::LimitedAgents(k) => Some(k.name().to_string()),
            Approach::Punishing(m) => Some(m.name().to_ascii_lowercase().replace('_', "-")),
            Approach::MechanicsDimensions => None,
        }
    }

    /// Validates an approach name against its target.
    pub fn parse(approach: &str, target: Option<&str>) -> Result<Approach, ApproachError> {
        let target = target.map(str::trim).filter(|t| !t.is_empty());
        match approach.trim() {
            "limited-agents" => {
                let name = "limited-agents";
                let t = target.ok_or(ApproachError::MissingTarget { approach: name })?;
                match t.parse::<AgentKind>() {
                    Ok(k) if k != AgentKind::Perfect => Ok(Approach::LimitedAgents(k)),
                    _ => Err(ApproachError::BadTarget {
                        approach: name,
                        target: t.to_string(),
                    }),
                }
            }
            "punishing" => {
                let name = "punishing";
                let t = target.ok_or(ApproachError::MissingTarget { approach: name })?;
                match t.parse::<MechanicKind>() {
                    Ok(m) if PUNISHABLE.contains(&m) => Ok(Approach::Punishing(m)),
                    _ => Err(ApproachError::BadTarget {
                        approach: name,
                        target: t.to_string(),
                    }),
                }
            }
            "mechanics-dimensions" => match target {
                None => Ok(Approach::MechanicsDimensions),
                Some(t) => Err(ApproachError::BadTarget {
                    approach: "mechanics-dimensions",
                    target: t.to_string(),
                }),
            },
            other => Err(ApproachError::UnknownApproach(other.to_string())),
        }
    }

    /// Maps a raw constraint value onto `[0, 1]` for ranking infeasibles.
    pub fn normalize(self, value: f64) -> f64 {
        match self {
            Approach::MechanicsDimensions => value,
            _ => (value + 1.0) / 2.0,
        }
    }
}

impl FromStr for Approach {
    type Err = ApproachError;

    /// `approach` or `approach:target`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            Some((a, t)) => Approach::parse(a, Some(t)),
            None => Approach::parse(s, None),
        }
    }
}

/// Everything the search needs to know about one scene.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub constraint: f64,
    pub satisfied: bool,
    pub fitness: f64,
    pub dims: Option<DimensionVector>,
}

/// Scores scenes for one approach.
pub trait Evaluator: Sync {
    fn approach(&self) -> Approach;

    /// `salt` varies the evaluation when it is stochastic and is ignored
    /// otherwise.
    fn evaluate(&self, scene: &Scene, salt: u64) -> Evaluation;

    /// Whether repeated evaluations of one scene always agree.
    fn is_deterministic(&self) -> bool;
}

/// Evaluator backed by the playing agents.
#[derive(Debug, Clone)]
pub struct AgentEvaluator {
    pub approach: Approach,
    pub engine: Engine,
    pub node_budget: usize,
    /// When set, each evaluation draws its node budget uniformly from
    /// `node_budget ± spread`.
    pub budget_spread: Option<usize>,
}

impl AgentEvaluator {
    pub fn new(approach: Approach, engine: Engine, node_budget: usize) -> AgentEvaluator {
        AgentEvaluator {
            approach,
            engine,
            node_budget,
            budget_spread: None,
        }
    }

    fn budget(&self, salt: u64) -> usize {
        match self.budget_spread {
            None | Some(0) => self.node_budget,
            Some(spread) => {
                use rand::{Rng, SeedableRng};
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(salt);
                let lo = self.node_budget.saturating_sub(spread).max(1);
                rng.random_range(lo..=self.node_budget + spread)
            }
        }
    }

    pub fn report(&self, scene: &Scene, salt: u64) -> ConstraintReport {
        let budget = self.budget(salt);
        let perfect = make_agent(AgentKind::Perfect, self.engine.clone()).with_budget(budget);
        match self.approach {
            Approach::LimitedAgents(kind) => {
                let limited = make_agent(kind, self.engine.clone()).with_budget(budget);
                limited_agents_constraint(scene, &limited, &perfect)
            }
            Approach::Punishing(m) => {
                punishing_constraint(scene, m, &perfect).expect("punishable mechanic checked at parse")
            }
            Approach::MechanicsDimensions => mechanics_constraint(scene, &perfect),
        }
    }
}

impl Evaluator for AgentEvaluator {
    fn approach(&self) -> Approach {
        self.approach
    }

    fn evaluate(&self, scene: &Scene, salt: u64) -> Evaluation {
        let report = self.report(scene, salt);
        let dims = match self.approach {
            Approach::MechanicsDimensions => Some(extract_dimensions(&report.perfect_trace)),
            _ => None,
        };
        Evaluation {
            constraint: report.value,
            satisfied: report.satisfied,
            fitness: entropy_fitness(scene).fitness,
            dims,
        }
    }

    fn is_deterministic(&self) -> bool {
        self.budget_spread.unwrap_or(0) == 0
    }
}
