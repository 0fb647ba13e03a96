#![allow(dead_code)]

use std::collections::HashMap;

use num_rational::Ratio;

use mechscene::agent::{make_agent, AStarAgent, AgentKind};
use mechscene::engine::{simulate_observed, Action, Direction, Engine, GameState, MechanicKind, Playthrough, RunLimits};
use mechscene::scene::{Scene, Slice, Tile};

/// Flat scene with the given core columns replaced.
pub fn scene_with(core_width: usize, edits: &[(usize, Slice)]) -> Scene {
    let mut core = vec![Slice::floor(14); core_width];
    for (c, s) in edits {
        core[*c] = s.clone();
    }
    Scene::from_core(&core, 3).unwrap()
}

/// A column of floor with a solid stack `height` tiles tall on top.
pub fn wall(height: usize) -> Slice {
    let mut tiles = vec![Tile::Empty; 14];
    for t in tiles.iter_mut().skip(14 - 2 - height) {
        *t = Tile::Ground;
    }
    Slice::new(tiles).unwrap()
}

pub fn gap() -> Slice {
    Slice::filled(14, Tile::Empty)
}

/// Holds right, presses jump at `takeoff` and keeps it down for `hold`
/// further ticks. Returns the furthest x reached while alive.
pub fn scripted_jump(scene: &Scene, run: bool, takeoff: u32, hold: u32, ticks: u32) -> f64 {
    let engine = Engine::default();
    let mut s = GameState::new(scene, &engine.physics);
    let mut best = s.player.x;
    for t in 0..ticks {
        let jump = t >= takeoff && t <= takeoff + hold;
        let out = engine.step(&s, Action::new(Direction::Right, jump, run));
        if out.dead {
            break;
        }
        s = out.state;
        best = best.max(s.player.x);
        if s.has_won() {
            break;
        }
    }
    best
}

/// Whether some take-off tick lets a scripted jump get past column `beyond`.
pub fn can_pass(scene: &Scene, run: bool, hold: u32, beyond: f64) -> bool {
    (0..120).any(|t0| scripted_jump(scene, run, t0, hold, 400) > beyond)
}

pub const FULL_HOLD: u32 = 1000;

/// Scene of uniformly random tiles. Ground-bound enemies only appear on
/// top of solid tiles.
pub fn random_scene<R: rand::Rng>(rng: &mut R) -> Scene {
    let core: Vec<Slice> = (0..14)
        .map(|_| {
            let mut tiles: Vec<Tile> = (0..14)
                .map(|_| Tile::ALL[rng.random_range(0..Tile::ALL.len())])
                .collect();
            for r in 0..14 {
                let grounded = r + 1 < 14 && tiles[r + 1].is_solid();
                if tiles[r].is_enemy() && tiles[r] != Tile::WingedKoopa && !grounded {
                    tiles[r] = Tile::Empty;
                }
            }
            Slice::new(tiles).unwrap()
        })
        .collect();
    Scene::from_core(&core, 3).unwrap()
}

/// Scene of slices drawn from the bundled corpus.
pub fn corpus_scene<R: rand::Rng>(bank: &mechscene::corpus::SliceBank, rng: &mut R) -> Scene {
    let core: Vec<Slice> = (0..14).map(|_| bank.sample(rng).unwrap().clone()).collect();
    Scene::from_core(&core, 3).unwrap()
}

/// Chi-square statistic of observed counts against expected counts.
pub fn chi_square(observed: &[u64], expected: &[f64]) -> f64 {
    observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum()
}

/// Checks every tick of a playthrough: each kill event removes one live
/// enemy and each pickup event consumes one pickup. Returns the ticks
/// checked, or the first violation.
pub fn check_soundness(sc: &Scene, kind: AgentKind) -> Result<usize, String> {
    let e = Engine::default();
    let agent = make_agent(kind, e.clone());
    let mut ticks = 0;
    let mut last_tick = 0;
    let mut violation: Option<String> = None;
    simulate_observed(sc, &mut AStarAgent::new(agent), RunLimits::for_scene(sc), &e, |before, out| {
        if violation.is_some() {
            return;
        }
        let after = &out.state;
        let kills = out
            .events
            .iter()
            .filter(|ev| matches!(ev.kind, MechanicKind::Stomp | MechanicKind::ShellKill | MechanicKind::FallKill))
            .count();
        let pickups = out
            .events
            .iter()
            .filter(|ev| matches!(ev.kind, MechanicKind::Coin | MechanicKind::Mushroom))
            .count();
        let lost = (after.lost_pickups - before.lost_pickups) as usize;
        let tick = before.tick;
        if before.live_enemies() - after.live_enemies() != kills {
            violation = Some(format!("tick {tick}: {kills} kill events, live enemies {} -> {}", before.live_enemies(), after.live_enemies()));
        } else if before.pickups() - after.pickups() - lost != pickups {
            violation = Some(format!("tick {tick}: {pickups} pickup events, pickups {} -> {}", before.pickups(), after.pickups()));
        } else if after.max_x < before.max_x {
            violation = Some(format!("tick {tick}: max_x decreased"));
        } else if out.events.iter().any(|ev| ev.tick < last_tick) {
            violation = Some(format!("tick {tick}: events out of order"));
        }
        if let Some(ev) = out.events.last() {
            last_tick = ev.tick;
        }
        ticks += 1;
    });
    match violation {
        Some(v) => Err(v),
        None => Ok(ticks),
    }
}

/// Limited-agents and punishing value recomputed from trace fields.
pub fn two_agent_oracle(perfect: &Playthrough, limited: &Playthrough, scene_length: usize) -> f64 {
    let a_perf = if perfect.won { 1 } else { 0 };
    let a_limit = if limited.won { 1 } else { 0 };
    if a_perf == 1 && a_limit == 0 {
        1.0
    } else {
        (perfect.max_distance - limited.max_distance) / scene_length as f64
    }
}

/// Mechanics-dimensions value recomputed from trace fields.
pub fn one_agent_oracle(perfect: &Playthrough, scene_length: usize) -> f64 {
    if perfect.won {
        1.0
    } else {
        perfect.max_distance / scene_length as f64
    }
}

/// Simplicity score from exact rational frequencies.
pub fn rational_oracle(scene: &Scene) -> (f64, f64, f64) {
    let grid: Vec<Vec<char>> = scene.serialize().lines().map(|l| l.chars().collect()).collect();
    let (h, w) = (grid.len(), grid[0].len());

    let mut counts: HashMap<char, u64> = HashMap::new();
    for row in &grid {
        for &c in row {
            *counts.entry(c).or_default() += 1;
        }
    }
    let n = (h * w) as u64;
    let entropy = |ps: &[Ratio<u64>]| -> f64 {
        ps.iter()
            .map(|p| {
                let p = *p.numer() as f64 / *p.denom() as f64;
                -p * p.ln()
            })
            .sum()
    };
    let k = counts.len();
    let tile = if k <= 1 {
        0.0
    } else {
        let ps: Vec<_> = counts.values().map(|&c| Ratio::new(c, n)).collect();
        entropy(&ps) / (k as f64).ln()
    };

    let mut changed = 0u64;
    for row in &grid {
        changed += row.windows(2).filter(|p| p[0] != p[1]).count() as u64;
    }
    let pairs = (h * (w - 1)) as u64;
    let p_change = Ratio::new(changed, pairs);
    let change = if changed == 0 || changed == pairs {
        0.0
    } else {
        entropy(&[p_change, Ratio::from_integer(1) - p_change]) / 2f64.ln()
    };
    (tile, change, 0.2 * (1.0 - tile) + 0.8 * (1.0 - change))
}

