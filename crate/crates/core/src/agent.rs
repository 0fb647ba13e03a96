//! Best-first playing agent and its limited variants.

use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::collections::{BinaryHeap, HashSet, VecDeque};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::engine::{Action, Engine, GameState, Policy, SharedModel};

pub const DEFAULT_NODE_BUDGET: usize = 800;
/// Ticks of a non-goal plan executed before planning again.
pub const DEFAULT_REPLAN_INTERVAL: u32 = 4;
/// Hold cap of the limited-jump agent.
pub const LIMITED_JUMP_HOLD: u32 = 2;
/// Ticks without forward progress after which the node budget doubles.
pub const STALL_ESCALATION_TICKS: u32 = 10;
/// Most doublings of the node budget while stalled.
pub const MAX_ESCALATIONS: u32 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AgentError {
    #[error("unknown agent kind '{0}' (expected perfect, no-run, limited-jump or enemy-blind)")]
    UnknownKind(String),
    #[error("agent needs at least one action")]
    NoActions,
    #[error("node budget must be at least 1")]
    ZeroBudget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgentKind {
    Perfect,
    NoRun,
    LimitedJump,
    EnemyBlind,
}

impl AgentKind {
    pub const LIMITED: [AgentKind; 3] = [AgentKind::NoRun, AgentKind::LimitedJump, AgentKind::EnemyBlind];

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Perfect => "perfect",
            AgentKind::NoRun => "no-run",
            AgentKind::LimitedJump => "limited-jump",
            AgentKind::EnemyBlind => "enemy-blind",
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgentKind {
    type Err = AgentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "perfect" => Ok(AgentKind::Perfect),
            "no-run" => Ok(AgentKind::NoRun),
            "limited-jump" => Ok(AgentKind::LimitedJump),
            "enemy-blind" => Ok(AgentKind::EnemyBlind),
            _ => Err(AgentError::UnknownKind(s.to_string())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AgentConfig {
    pub actions: Vec<Action>,
    pub node_budget: usize,
    /// Cap on jump hold ticks; `None` is uncapped.
    pub max_jump_hold: Option<u32>,
    pub model: SharedModel,
    /// Ticks between plans when the last plan did not reach the goal.
    pub replan_interval: u32,
    /// Ticks without forward progress after which the node budget doubles.
    pub stall_escalation: u32,
    /// Most doublings of the node budget while stalled.
    pub max_escalations: u32,
}

impl AgentConfig {
    pub fn perfect(engine: Engine) -> AgentConfig {
        AgentConfig {
            actions: Action::all(),
            node_budget: DEFAULT_NODE_BUDGET,
            max_jump_hold: None,
            model: Arc::new(engine),
            replan_interval: DEFAULT_REPLAN_INTERVAL,
            stall_escalation: STALL_ESCALATION_TICKS,
            max_escalations: MAX_ESCALATIONS,
        }
    }

    pub fn with_model(mut self, model: SharedModel) -> AgentConfig {
        self.model = model;
        self
    }

    pub fn with_budget(mut self, node_budget: usize) -> AgentConfig {
        self.node_budget = node_budget;
        self
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        if self.actions.is_empty() {
            return Err(AgentError::NoActions);
        }
        if self.node_budget == 0 {
            return Err(AgentError::ZeroBudget);
        }
        Ok(())
    }

    /// The action the player can actually perform: once the hold cap is
    /// used up the jump button reads as released.
    pub fn effective(&self, state: &GameState, action: Action) -> Action {
        match self.max_jump_hold {
            Some(cap) if action.jump && !state.player.grounded && state.player.jump_hold_used >= cap => Action {
                jump: false,
                ..action
            },
            _ => action,
        }
    }
}

/// Builds the configuration of a playing agent on top of `engine`.
pub fn make_agent(kind: AgentKind, engine: Engine) -> AgentConfig {
    let perfect = AgentConfig::perfect(engine);
    match kind {
        AgentKind::Perfect => perfect,
        AgentKind::NoRun => AgentConfig {
            actions: Action::all().into_iter().filter(|a| !a.run).collect(),
            ..perfect
        },
        AgentKind::LimitedJump => AgentConfig {
            max_jump_hold: Some(LIMITED_JUMP_HOLD),
            ..perfect
        },
        AgentKind::EnemyBlind => {
            let model = crate::engine::wrap_enemy_blind(perfect.model.clone());
            perfect.with_model(model)
        }
    }
}

/// Parses a limitation name and builds the limited agent.
pub fn make_limited(kind: &str, engine: Engine) -> Result<AgentConfig, AgentError> {
    let kind: AgentKind = kind.parse()?;
    if kind == AgentKind::Perfect {
        return Err(AgentError::UnknownKind(kind.to_string()));
    }
    Ok(make_agent(kind, engine))
}

struct Node {
    state: GameState,
    parent: Option<usize>,
    action: Action,
    g: u32,
    f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Rank {
    f: f64,
    x: f64,
    index: usize,
}

impl Eq for Rank {}

impl Ord for Rank {
    // BinaryHeap pops the maximum, so "better" compares greater.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then(self.x.total_cmp(&other.x))
            .then(other.index.cmp(&self.index))
    }
}

impl PartialOrd for Rank {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Result of one planning call.
#[derive(Debug, Clone)]
pub struct PlanResult {
    /// Actions from the root to the chosen node, with the planning-view
    /// state before each action.
    pub steps: Vec<(GameState, Action)>,
    /// f of the chosen node.
    pub f: f64,
    pub reached_goal: bool,
    pub expansions: usize,
}

impl PlanResult {
    pub fn first_action(&self) -> Action {
        self.steps.first().map_or(Action::IDLE, |s| s.1)
    }
}

/// Lower bound on the ticks left to reach the right edge, at the agent's
/// own top speed.
fn heuristic(engine: &Engine, can_run: bool, s: &GameState) -> f64 {
    let ph = &engine.physics;
    let (vmax, accel) = if can_run {
        (ph.run_max_speed, ph.run_accel)
    } else {
        (ph.walk_max_speed, ph.walk_accel)
    };
    ph.min_ticks_at(s.width() - s.player.x, s.player.vx, vmax, accel)
}

/// f rounded so that float noise along an optimal chain does not break ties.
fn rank_f(f: f64) -> f64 {
    (f * 1e6).round() / 1e6
}

fn quantize(v: f64, steps: f64) -> i64 {
    (v * steps).round() as i64
}

fn state_key(s: &GameState) -> u64 {
    let p = &s.player;
    let mut h = DefaultHasher::new();
    (
        quantize(p.x, 16.0),
        quantize(p.y, 16.0),
        quantize(p.vx, 32.0),
        quantize(p.vy, 32.0),
    )
        .hash(&mut h);
    (p.grounded, p.power, p.jump_hold_remaining, p.jump_released, p.invulnerable > 0).hash(&mut h);
    s.terrain.version.hash(&mut h);
    for e in &s.entities {
        (e.kind, quantize(e.x, 16.0), quantize(e.y, 16.0), e.vx > 0.0).hash(&mut h);
    }
    h.finish()
}

fn path_to(nodes: &[Node], mut i: usize) -> Vec<(GameState, Action)> {
    let mut steps = Vec::new();
    while let Some(parent) = nodes[i].parent {
        steps.push((nodes[parent].state.clone(), nodes[i].action));
        i = parent;
    }
    steps.reverse();
    steps
}

/// Best-first search from `state` (already in the planner's view).
pub fn plan_path(state: &GameState, config: &AgentConfig) -> PlanResult {
    let model = &config.model;
    let engine = model.engine();
    let can_run = config.actions.iter().any(|a| a.run);
    let root_f = heuristic(engine, can_run, state);
    let mut nodes = vec![Node {
        state: state.clone(),
        parent: None,
        action: Action::IDLE,
        g: 0,
        f: root_f,
    }];
    let mut frontier = BinaryHeap::new();
    frontier.push(Rank {
        f: rank_f(root_f),
        x: state.player.x,
        index: 0,
    });
    let mut seen = HashSet::new();
    seen.insert(state_key(state));
    // Deepest tick each root action survived to, for the all-dead fallback.
    let mut survival: Vec<(Action, u32)> = Vec::new();
    let mut expansions = 0;

    while expansions < config.node_budget {
        let Some(top) = frontier.pop() else { break };
        expansions += 1;
        let parent_state = nodes[top.index].state.clone();
        let g = nodes[top.index].g + 1;
        let mut tried: Vec<Action> = Vec::with_capacity(config.actions.len());
        for &raw in &config.actions {
            let action = config.effective(&parent_state, raw);
            if tried.contains(&action) {
                continue;
            }
            tried.push(action);
            let out = model.step(&parent_state, action);
            if top.index == 0 {
                survival.push((action, if out.dead { 0 } else { 1 }));
            } else {
                let root_action = first_action_of(&nodes, top.index);
                if let Some(entry) = survival.iter_mut().find(|e| e.0 == root_action) {
                    entry.1 = entry.1.max(g - u32::from(out.dead));
                }
            }
            if out.dead {
                continue;
            }
            let won = out.state.has_won();
            if !won && !seen.insert(state_key(&out.state)) {
                continue;
            }
            let f = g as f64 + heuristic(engine, can_run, &out.state);
            let x = out.state.player.x;
            nodes.push(Node {
                state: out.state,
                parent: Some(top.index),
                action,
                g,
                f,
            });
            let index = nodes.len() - 1;
            if won {
                return PlanResult {
                    steps: path_to(&nodes, index),
                    f: g as f64,
                    reached_goal: true,
                    expansions,
                };
            }
            frontier.push(Rank { f: rank_f(f), x, index });
        }
    }

    match frontier.pop() {
        Some(best) if best.index != 0 => PlanResult {
            steps: path_to(&nodes, best.index),
            f: nodes[best.index].f,
            reached_goal: false,
            expansions,
        },
        Some(best) => PlanResult {
            steps: Vec::new(),
            f: best.f,
            reached_goal: false,
            expansions,
        },
        None => {
            // Everything died: take the action that stayed alive longest.
            let fallback = survival
                .iter()
                .fold(None::<(Action, u32)>, |acc, &(a, t)| match acc {
                    Some((_, best)) if best >= t => acc,
                    _ => Some((a, t)),
                })
                .map_or(Action::IDLE, |(a, _)| a);
            PlanResult {
                steps: vec![(state.clone(), fallback)],
                f: f64::INFINITY,
                reached_goal: false,
                expansions,
            }
        }
    }
}

fn first_action_of(nodes: &[Node], mut i: usize) -> Action {
    loop {
        let parent = nodes[i].parent.expect("non-root node");
        if parent == 0 {
            return nodes[i].action;
        }
        i = parent;
    }
}

/// First action of the best plan from `state`.
pub fn plan(state: &GameState, config: &AgentConfig) -> Action {
    let view = config.model.view(state);
    plan_path(&view, config).first_action()
}

/// Replans every `replan_interval` ticks. A plan that reached the goal is
/// followed for as long as the world matches its predictions. While the
/// player makes no forward progress the node budget doubles every
/// `stall_escalation` ticks, at most `max_escalations` times.
#[derive(Debug)]
pub struct AStarAgent {
    config: AgentConfig,
    queued: VecDeque<(GameState, Action)>,
    best_x: f64,
    stalled: u32,
    pub plans: u32,
}

impl AStarAgent {
    pub fn new(config: AgentConfig) -> AStarAgent {
        AStarAgent {
            config,
            queued: VecDeque::new(),
            best_x: f64::NEG_INFINITY,
            stalled: 0,
            plans: 0,
        }
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }
}

impl Policy for AStarAgent {
    fn act(&mut self, state: &GameState) -> Action {
        let view = self.config.model.view(state);
        if state.player.x > self.best_x {
            self.best_x = state.player.x;
            self.stalled = 0;
        } else {
            self.stalled += 1;
        }
        let reuse = match self.queued.front() {
            Some((expected, _)) => *expected == view,
            None => false,
        };
        if !reuse {
            let doublings = (self.stalled / self.config.stall_escalation.max(1)).min(self.config.max_escalations);
            let result = if doublings == 0 {
                plan_path(&view, &self.config)
            } else {
                let budget = self.config.node_budget << doublings;
                plan_path(&view, &self.config.clone().with_budget(budget))
            };
            self.plans += 1;
            self.queued = result.steps.into();
            if !result.reached_goal {
                self.queued.truncate(self.config.replan_interval.max(1) as usize);
            }
        }
        let action = self.queued.pop_front().map_or(Action::IDLE, |s| s.1);
        self.config.effective(state, action)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{simulate, Direction, RunLimits};
    use crate::scene::Scene;

    #[test]
    fn kinds_parse() {
        for k in [AgentKind::Perfect, AgentKind::NoRun, AgentKind::LimitedJump, AgentKind::EnemyBlind] {
            assert_eq!(k.name().parse::<AgentKind>(), Ok(k));
        }
        assert!("sleepy".parse::<AgentKind>().is_err());
        assert!(make_limited("perfect", Engine::default()).is_err());
    }

    #[test]
    fn no_run_has_six_actions() {
        let c = make_limited("no-run", Engine::default()).unwrap();
        assert_eq!(c.actions.len(), 6);
        assert!(c.actions.iter().all(|a| !a.run));
    }

    #[test]
    fn limited_jump_keeps_all_actions() {
        let c = make_limited("limited-jump", Engine::default()).unwrap();
        assert_eq!(c.actions.len(), 12);
        assert_eq!(c.max_jump_hold, Some(2));
    }

    #[test]
    fn flat_floor_plan_goes_right() {
        let scene = Scene::flat(14, 14, 3);
        let config = AgentConfig::perfect(Engine::default());
        let s = GameState::new(&scene, &config.model.engine().physics);
        assert_eq!(plan(&s, &config).direction, Direction::Right);
    }

    #[test]
    fn perfect_agent_wins_flat_scene_with_one_plan() {
        let scene = Scene::flat(14, 14, 3);
        let mut agent = AStarAgent::new(AgentConfig::perfect(Engine::default()));
        let p = simulate(&scene, &mut agent, RunLimits::for_scene(&scene), &Engine::default());
        assert!(p.won);
        assert_eq!(p.max_distance, 20.0);
        assert_eq!(agent.plans, 1);
    }
}
