use std::fmt::Write as _;

use thiserror::Error;

use super::events::{MechanicEvent, MechanicKind};
use super::state::{Action, GameState};
use super::step::{Engine, StepOutcome};
use crate::scene::Scene;

/// Ticks allowed per scene column.
pub const TICKS_PER_COLUMN: u32 = 30;

/// Chooses one action per tick.
pub trait Policy {
    fn act(&mut self, state: &GameState) -> Action;
}

impl<F: FnMut(&GameState) -> Action> Policy for F {
    fn act(&mut self, state: &GameState) -> Action {
        self(state)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Playthrough {
    pub won: bool,
    pub died: bool,
    /// Furthest x reached, equal to the scene width on a win.
    pub max_distance: f64,
    pub ticks_used: u32,
    pub events: Vec<MechanicEvent>,
}

impl Playthrough {
    pub fn fired(&self, kind: MechanicKind) -> bool {
        self.events.iter().any(|e| e.kind == kind)
    }

    pub fn count(&self, kind: MechanicKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    /// Line-oriented trace: a summary line, then `tick<TAB>KIND<TAB>x`.
    pub fn to_trace(&self) -> String {
        let mut out = format!(
            "won={} died={} distance={} ticks={}\n",
            self.won, self.died, self.max_distance, self.ticks_used
        );
        for e in &self.events {
            let _ = writeln!(out, "{}\t{}\t{}", e.tick, e.kind, e.x);
        }
        out
    }

    pub fn from_trace(text: &str) -> Result<Playthrough, TraceError> {
        let mut lines = text.lines().enumerate();
        let (_, head) = lines.next().ok_or(TraceError { line: 1, message: "empty trace".into() })?;
        let err = |line: usize, message: String| TraceError { line, message };
        let mut p = Playthrough {
            won: false,
            died: false,
            max_distance: 0.0,
            ticks_used: 0,
            events: Vec::new(),
        };
        for field in head.split_whitespace() {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| err(1, format!("bad field '{field}'")))?;
            let bad = |_| err(1, format!("bad value for {k}"));
            match k {
                "won" => p.won = v.parse().map_err(|_| err(1, "bad won".into()))?,
                "died" => p.died = v.parse().map_err(|_| err(1, "bad died".into()))?,
                "distance" => p.max_distance = v.parse().map_err(bad)?,
                "ticks" => p.ticks_used = v.parse().map_err(|_| err(1, "bad ticks".into()))?,
                _ => return Err(err(1, format!("unknown field '{k}'"))),
            }
        }
        for (i, line) in lines {
            let n = i + 1;
            let parts: Vec<&str> = line.split('\t').collect();
            let [tick, kind, x] = parts[..] else {
                return Err(err(n, "expected three tab-separated fields".into()));
            };
            p.events.push(MechanicEvent {
                tick: tick.parse().map_err(|_| err(n, format!("bad tick '{tick}'")))?,
                kind: kind.parse().map_err(|e| err(n, format!("{e}")))?,
                x: x.parse().map_err(|_| err(n, format!("bad x '{x}'")))?,
            });
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("trace line {line}: {message}")]
pub struct TraceError {
    pub line: usize,
    pub message: String,
}

/// Limits on a single playthrough.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunLimits {
    pub tick_budget: u32,
    /// End the run after this many ticks without a new furthest x.
    pub stall_ticks: Option<u32>,
}

impl RunLimits {
    pub fn budget(tick_budget: u32) -> RunLimits {
        RunLimits {
            tick_budget,
            stall_ticks: None,
        }
    }

    /// Default budget for a scene: 30 ticks per column.
    pub fn for_scene(scene: &Scene) -> RunLimits {
        RunLimits {
            tick_budget: TICKS_PER_COLUMN * scene.width() as u32,
            stall_ticks: Some(DEFAULT_STALL_TICKS),
        }
    }
}

pub const DEFAULT_STALL_TICKS: u32 = 150;

/// Plays `policy` on `scene` with the base engine until a win, a death or
/// the limits run out.
pub fn simulate(scene: &Scene, policy: &mut dyn Policy, limits: RunLimits, engine: &Engine) -> Playthrough {
    simulate_observed(scene, policy, limits, engine, |_, _| {})
}

/// As [`simulate`], calling `observe(before, outcome)` after every tick.
pub fn simulate_observed(
    scene: &Scene,
    policy: &mut dyn Policy,
    limits: RunLimits,
    engine: &Engine,
    mut observe: impl FnMut(&GameState, &StepOutcome),
) -> Playthrough {
    let mut state = GameState::new(scene, &engine.physics);
    let mut events = Vec::new();
    let mut won = false;
    let mut died = false;
    let mut best = state.max_x;
    let mut last_progress = 0;
    let mut ticks = 0;
    while ticks < limits.tick_budget.max(1) {
        let action = policy.act(&state);
        let out = engine.step(&state, action);
        observe(&state, &out);
        ticks += 1;
        events.extend_from_slice(&out.events);
        state = out.state;
        if state.has_won() {
            won = true;
            break;
        }
        if out.dead {
            died = true;
            break;
        }
        if state.max_x > best {
            best = state.max_x;
            last_progress = ticks;
        } else if limits.stall_ticks.is_some_and(|s| ticks - last_progress >= s) {
            break;
        }
    }
    Playthrough {
        won,
        died,
        max_distance: if won { state.width() } else { state.max_x },
        ticks_used: ticks,
        events,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::state::Direction;

    #[test]
    fn trace_round_trips() {
        let p = Playthrough {
            won: false,
            died: true,
            max_distance: 7.25,
            ticks_used: 41,
            events: vec![
                MechanicEvent { kind: MechanicKind::Jump, tick: 3, x: 2.1 },
                MechanicEvent { kind: MechanicKind::Stomp, tick: 20, x: 6.000000000000001 },
            ],
        };
        assert_eq!(Playthrough::from_trace(&p.to_trace()).unwrap(), p);
        assert!(Playthrough::from_trace("won=true\n1\tFLY\t2\n").is_err());
    }

    #[test]
    fn one_tick_budget_barely_moves() {
        let scene = Scene::flat(14, 14, 3);
        let mut right = |_: &GameState| Action::new(Direction::Right, false, true);
        let p = simulate(&scene, &mut right, RunLimits::budget(1), &Engine::default());
        assert!(!p.won);
        assert_eq!(p.ticks_used, 1);
        assert!((p.max_distance - 1.5).abs() < 0.1);
    }

    #[test]
    fn holding_right_wins_flat_scene() {
        let scene = Scene::flat(14, 14, 3);
        let mut right = |_: &GameState| Action::new(Direction::Right, false, true);
        let p = simulate(&scene, &mut right, RunLimits::for_scene(&scene), &Engine::default());
        assert!(p.won);
        assert_eq!(p.max_distance, 20.0);
    }
}
