use std::fmt::Debug;
use std::sync::Arc;

use thiserror::Error;

use super::events::MechanicKind;
use super::state::{Action, GameState};
use super::step::{Engine, StepOutcome};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("{0} cannot be punished (expected one of HIGH_JUMP, SPEED, STOMP, SHELL_KILL, MUSHROOM, COIN)")]
    NotPunishable(MechanicKind),
}

/// A step function the planner can search with.
///
/// Decorators never change the transition itself. They only add death
/// verdicts or hide parts of the state.
pub trait ForwardModel: Debug + Send + Sync {
    fn step(&self, state: &GameState, action: Action) -> StepOutcome;

    /// The state as the planner perceives it.
    fn view(&self, state: &GameState) -> GameState {
        state.clone()
    }

    fn engine(&self) -> &Engine;
}

pub type SharedModel = Arc<dyn ForwardModel>;

impl ForwardModel for Engine {
    fn step(&self, state: &GameState, action: Action) -> StepOutcome {
        Engine::step(self, state, action)
    }

    fn engine(&self) -> &Engine {
        self
    }
}

/// Mechanics that have a punishing model.
pub const PUNISHABLE: [MechanicKind; 6] = [
    MechanicKind::HighJump,
    MechanicKind::Speed,
    MechanicKind::Stomp,
    MechanicKind::ShellKill,
    MechanicKind::Mushroom,
    MechanicKind::Coin,
];

/// Reports death whenever the punished mechanic fires.
///
/// HIGH_JUMP is punished on the hold duration: the player dies on the tick
/// the jump button has sustained the jump for more than
/// `punished_hold_ticks`.
#[derive(Debug)]
pub struct Punishing {
    inner: SharedModel,
    mechanic: MechanicKind,
}

impl Punishing {
    pub fn mechanic(&self) -> MechanicKind {
        self.mechanic
    }
}

impl ForwardModel for Punishing {
    fn step(&self, state: &GameState, action: Action) -> StepOutcome {
        let mut out = self.inner.step(state, action);
        let punished = match self.mechanic {
            MechanicKind::HighJump => {
                let limit = self.engine().physics.punished_hold_ticks;
                out.state.player.jump_hold_used > limit && state.player.jump_hold_used <= limit
            }
            m => out.events.iter().any(|e| e.kind == m),
        };
        out.dead |= punished;
        out
    }

    fn view(&self, state: &GameState) -> GameState {
        self.inner.view(state)
    }

    fn engine(&self) -> &Engine {
        self.inner.engine()
    }
}

pub fn wrap_punishing(model: SharedModel, mechanic: MechanicKind) -> Result<SharedModel, ModelError> {
    if !PUNISHABLE.contains(&mechanic) {
        return Err(ModelError::NotPunishable(mechanic));
    }
    Ok(Arc::new(Punishing {
        inner: model,
        mechanic,
    }))
}

/// Presents the planner a world without enemies or shells.
#[derive(Debug)]
pub struct EnemyBlind {
    inner: SharedModel,
}

fn strip_hostiles(state: &GameState) -> GameState {
    let mut s = state.clone();
    s.entities.retain(|e| !e.kind.is_hostile());
    s
}

impl ForwardModel for EnemyBlind {
    fn step(&self, state: &GameState, action: Action) -> StepOutcome {
        if state.entities.iter().any(|e| e.kind.is_hostile()) {
            self.inner.step(&strip_hostiles(state), action)
        } else {
            self.inner.step(state, action)
        }
    }

    fn view(&self, state: &GameState) -> GameState {
        strip_hostiles(&self.inner.view(state))
    }

    fn engine(&self) -> &Engine {
        self.inner.engine()
    }
}

pub fn wrap_enemy_blind(model: SharedModel) -> SharedModel {
    Arc::new(EnemyBlind { inner: model })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::state::Direction;
    use crate::scene::Scene;

    fn base() -> SharedModel {
        Arc::new(Engine::default())
    }

    #[test]
    fn jump_and_fall_kill_are_not_punishable() {
        for m in [MechanicKind::Jump, MechanicKind::LongJump, MechanicKind::FallKill] {
            assert!(wrap_punishing(base(), m).is_err());
        }
        for m in PUNISHABLE {
            assert!(wrap_punishing(base(), m).is_ok());
        }
    }

    #[test]
    fn speed_punishment_fires_above_walk_speed() {
        let model = wrap_punishing(base(), MechanicKind::Speed).unwrap();
        let scene = Scene::flat(14, 14, 3);
        let mut s = GameState::new(&scene, &model.engine().physics);
        let run = Action::new(Direction::Right, false, true);
        let mut died = false;
        for _ in 0..20 {
            let out = model.step(&s, run);
            let plain = model.engine().step(&s, run);
            assert!(!plain.dead);
            if out.dead {
                assert!(out.state.player.vx > model.engine().physics.walk_max_speed);
                died = true;
                break;
            }
            s = out.state;
        }
        assert!(died);
    }

    #[test]
    fn long_hold_is_punished_as_high_jump() {
        let model = wrap_punishing(base(), MechanicKind::HighJump).unwrap();
        let scene = Scene::flat(14, 14, 3);
        let mut s = GameState::new(&scene, &model.engine().physics);
        let jump = Action::new(Direction::None, true, false);
        let mut verdicts = Vec::new();
        for _ in 0..8 {
            let out = model.step(&s, jump);
            verdicts.push(out.dead);
            s = out.state;
        }
        // Take-off tick, then holds 1..=4 are allowed, the fifth hold is not.
        assert_eq!(verdicts[..6], [false, false, false, false, false, true]);
    }
}
