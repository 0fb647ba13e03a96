//! Deterministic tick-based forward model of the platformer.

mod events;
mod model;
mod physics;
mod simulate;
mod state;
mod step;

pub use events::{MechanicEvent, MechanicKind, UnknownMechanic};
pub use model::{wrap_enemy_blind, wrap_punishing, EnemyBlind, ForwardModel, ModelError, Punishing, SharedModel, PUNISHABLE};
pub use physics::PhysicsConfig;
pub use simulate::{
    simulate, simulate_observed, Playthrough, Policy, RunLimits, TraceError, DEFAULT_STALL_TICKS, TICKS_PER_COLUMN,
};
pub use state::{Action, Cell, Direction, Entity, EntityKind, GameState, Player, Power, Terrain};
pub use step::{Engine, StepOutcome};
