use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Game mechanics the forward model reports while it runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MechanicKind {
    Jump,
    HighJump,
    LongJump,
    Speed,
    Stomp,
    ShellKill,
    FallKill,
    Mushroom,
    Coin,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown mechanic '{0}'")]
pub struct UnknownMechanic(pub String);

impl MechanicKind {
    pub const ALL: [MechanicKind; 9] = [
        MechanicKind::Jump,
        MechanicKind::HighJump,
        MechanicKind::LongJump,
        MechanicKind::Speed,
        MechanicKind::Stomp,
        MechanicKind::ShellKill,
        MechanicKind::FallKill,
        MechanicKind::Mushroom,
        MechanicKind::Coin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MechanicKind::Jump => "JUMP",
            MechanicKind::HighJump => "HIGH_JUMP",
            MechanicKind::LongJump => "LONG_JUMP",
            MechanicKind::Speed => "SPEED",
            MechanicKind::Stomp => "STOMP",
            MechanicKind::ShellKill => "SHELL_KILL",
            MechanicKind::FallKill => "FALL_KILL",
            MechanicKind::Mushroom => "MUSHROOM",
            MechanicKind::Coin => "COIN",
        }
    }
}

impl fmt::Display for MechanicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Accepts the trace spelling (`HIGH_JUMP`) and the config spelling
/// (`high-jump`).
impl FromStr for MechanicKind {
    type Err = UnknownMechanic;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        MechanicKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| UnknownMechanic(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanicEvent {
    pub kind: MechanicKind,
    pub tick: u32,
    pub x: f64,
}
