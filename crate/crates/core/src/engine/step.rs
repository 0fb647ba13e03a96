use std::sync::Arc;

use super::events::{MechanicEvent, MechanicKind};
use super::physics::PhysicsConfig;
use super::state::{Action, Cell, Direction, Entity, EntityKind, GameState, Power, Terrain};

/// Overlap slack so that boxes resting flush against a tile do not register
/// as intersecting it.
const EPS: f64 = 1e-6;

/// Result of advancing one tick.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: GameState,
    pub events: Vec<MechanicEvent>,
    pub dead: bool,
}

/// The base forward model.
#[derive(Debug, Clone, Default)]
pub struct Engine {
    pub physics: PhysicsConfig,
}

#[derive(Debug, Clone, Copy)]
struct Aabb {
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
}

impl Aabb {
    fn around(x: f64, feet: f64, width: f64, height: f64) -> Aabb {
        Aabb {
            left: x - width / 2.0,
            right: x + width / 2.0,
            top: feet - height,
            bottom: feet,
        }
    }

    fn overlaps(&self, other: &Aabb) -> bool {
        self.left < other.right - EPS
            && other.left < self.right - EPS
            && self.top < other.bottom - EPS
            && other.top < self.bottom - EPS
    }

    fn cols(&self) -> std::ops::RangeInclusive<i64> {
        ((self.left + EPS).floor() as i64)..=((self.right - EPS).floor() as i64)
    }

    fn rows(&self) -> std::ops::RangeInclusive<i64> {
        ((self.top + EPS).floor() as i64)..=((self.bottom - EPS).floor() as i64)
    }
}

/// Outcome of moving a box through the terrain along one axis.
#[derive(Debug, Clone, Copy, Default)]
struct Contact {
    hit: bool,
    /// Row or column of the first blocking tile.
    line: i64,
}

fn first_solid_col(terrain: &Terrain, rows: &std::ops::RangeInclusive<i64>, mut cols: impl Iterator<Item = i64>) -> Option<i64> {
    cols.find(|&c| rows.clone().any(|r| terrain.solid(c, r)))
}

fn first_solid_row(terrain: &Terrain, cols: &std::ops::RangeInclusive<i64>, mut rows: impl Iterator<Item = i64>) -> Option<i64> {
    rows.find(|&r| cols.clone().any(|c| terrain.solid(c, r)))
}

/// Moves horizontally by `dx` and stops against the first solid column.
fn move_x(terrain: &Terrain, x: &mut f64, feet: f64, width: f64, height: f64, dx: f64) -> Contact {
    *x += dx;
    let b = Aabb::around(*x, feet, width, height);
    let rows = b.rows();
    if dx > 0.0 {
        if let Some(c) = first_solid_col(terrain, &rows, b.cols()) {
            *x = c as f64 - width / 2.0;
            return Contact { hit: true, line: c };
        }
    } else if dx < 0.0 {
        if let Some(c) = first_solid_col(terrain, &rows, b.cols().rev()) {
            *x = c as f64 + 1.0 + width / 2.0;
            return Contact { hit: true, line: c };
        }
    }
    Contact::default()
}

/// Moves vertically by `dy`. Falling stops on the first solid row; rising
/// stops under it.
fn move_y(terrain: &Terrain, x: f64, feet: &mut f64, width: f64, height: f64, dy: f64) -> Contact {
    *feet += dy;
    let b = Aabb::around(x, *feet, width, height);
    let cols = b.cols();
    if dy > 0.0 {
        if let Some(r) = first_solid_row(terrain, &cols, b.rows()) {
            *feet = r as f64;
            return Contact { hit: true, line: r };
        }
    } else if dy < 0.0 {
        if let Some(r) = first_solid_row(terrain, &cols, b.rows().rev()) {
            *feet = r as f64 + 1.0 + height;
            return Contact { hit: true, line: r };
        }
    }
    Contact::default()
}

fn approach(v: f64, target: f64, rate: f64) -> f64 {
    if v < target {
        (v + rate).min(target)
    } else {
        (v - rate).max(target)
    }
}

impl Engine {
    pub fn new(physics: PhysicsConfig) -> Engine {
        Engine { physics }
    }

    /// Advances the game by one tick.
    pub fn step(&self, state: &GameState, action: Action) -> StepOutcome {
        let ph = &self.physics;
        let mut s = state.clone();
        let mut events = Vec::new();
        let tick = state.tick;
        let width = s.width();
        let height = s.height();
        let mut dead = false;

        let emit = |events: &mut Vec<MechanicEvent>, kind, x| {
            events.push(MechanicEvent { kind, tick, x });
        };

        // Horizontal input.
        {
            let p = &mut s.player;
            let (vmax, accel) = if action.run {
                (ph.run_max_speed, ph.run_accel)
            } else {
                (ph.walk_max_speed, ph.walk_accel)
            };
            p.vx = match action.direction {
                Direction::Right if p.vx < vmax => (p.vx + accel).min(vmax),
                Direction::Right => (p.vx - ph.friction).max(vmax),
                Direction::Left if p.vx > -vmax => (p.vx - accel).max(-vmax),
                Direction::Left => (p.vx + ph.friction).min(-vmax),
                Direction::None => approach(p.vx, 0.0, ph.friction),
            };
            let speeding = p.vx.abs() > ph.walk_max_speed + EPS;
            if speeding && !p.speeding {
                emit(&mut events, MechanicKind::Speed, p.x);
            }
            p.speeding = speeding;
        }

        // Vertical input.
        {
            let p = &mut s.player;
            if action.jump && p.grounded && p.jump_released {
                p.vy = -ph.jump_impulse;
                p.grounded = false;
                p.jump_hold_remaining = ph.jump_hold_ticks;
                p.jump_hold_used = 0;
                p.jump_origin = Some((p.x, p.y));
                p.high_jump_fired = false;
                emit(&mut events, MechanicKind::Jump, p.x);
            } else if !p.grounded && action.jump && p.jump_hold_remaining > 0 && p.vy < 0.0 {
                p.jump_hold_remaining -= 1;
                p.jump_hold_used += 1;
            } else {
                p.jump_hold_remaining = 0;
                p.vy = (p.vy + ph.gravity).min(ph.max_fall_speed);
            }
            p.jump_released = !action.jump;
            if p.invulnerable > 0 {
                p.invulnerable -= 1;
            }
        }

        // Player movement against the terrain.
        let prev_feet = s.player.y;
        let mut bumped: Option<(i64, i64)> = None;
        {
            let terrain = &*s.terrain;
            let p = &mut s.player;
            let h = match p.power {
                Power::Small => ph.small_height,
                Power::Big => ph.big_height,
            };
            let w = ph.player_width;
            if move_x(terrain, &mut p.x, p.y, w, h, p.vx).hit {
                p.vx = 0.0;
            }
            if p.x < w / 2.0 {
                p.x = w / 2.0;
                p.vx = p.vx.max(0.0);
            }
            let was_grounded = p.grounded;
            let vy = p.vy;
            p.grounded = false;
            let contact = move_y(terrain, p.x, &mut p.y, w, h, vy);
            if contact.hit && vy > 0.0 {
                p.vy = 0.0;
                p.grounded = true;
            } else if contact.hit && vy < 0.0 {
                p.vy = 0.0;
                p.jump_hold_remaining = 0;
                let b = Aabb::around(p.x, p.y, w, h);
                let centre = p.x.floor() as i64;
                let col = if terrain.solid(centre, contact.line) {
                    centre
                } else {
                    *b.cols()
                        .filter(|&c| terrain.solid(c, contact.line))
                        .collect::<Vec<_>>()
                        .first()
                        .unwrap_or(&centre)
                };
                bumped = Some((col, contact.line));
            }
            if p.grounded && !was_grounded {
                if let Some((x0, _)) = p.jump_origin.take() {
                    if (p.x - x0).abs() > ph.long_jump_distance {
                        emit(&mut events, MechanicKind::LongJump, p.x);
                    }
                }
            }
            if let Some((_, y0)) = p.jump_origin {
                if !p.high_jump_fired && y0 - p.y > ph.high_jump_height {
                    p.high_jump_fired = true;
                    emit(&mut events, MechanicKind::HighJump, p.x);
                }
            }
        }

        if let Some((col, row)) = bumped {
            self.bump(&mut s, col, row, &mut events, tick);
        }

        // Loose coins.
        {
            let p = &s.player;
            let b = Aabb::around(p.x, p.y, ph.player_width, p.height(ph));
            let mut hits = Vec::new();
            for c in b.cols() {
                for r in b.rows() {
                    if s.terrain.get(c, r) == Cell::Coin {
                        hits.push((c, r));
                    }
                }
            }
            if !hits.is_empty() {
                let terrain = Arc::make_mut(&mut s.terrain);
                for (c, r) in hits {
                    terrain.set(c, r, Cell::Empty);
                    emit(&mut events, MechanicKind::Coin, p.x);
                }
            }
        }

        // Entities.
        for i in 0..s.entities.len() {
            self.advance_entity(&mut s, i, width, height, &mut events, tick);
        }
        self.resolve_shells(&mut s, &mut events, tick);
        if self.resolve_player_contacts(&mut s, prev_feet, &mut events, tick) {
            dead = true;
        }
        s.entities.retain(|e| e.alive);

        if s.player.y > height {
            dead = true;
        }
        s.tick += 1;
        s.max_x = s.max_x.max(s.player.x.min(width));
        StepOutcome {
            state: s,
            events,
            dead,
        }
    }

    fn bump(&self, s: &mut GameState, col: i64, row: i64, events: &mut Vec<MechanicEvent>, tick: u32) {
        let cell = s.terrain.get(col, row);
        match cell {
            Cell::CoinBlock => {
                Arc::make_mut(&mut s.terrain).set(col, row, Cell::Solid);
                events.push(MechanicEvent {
                    kind: MechanicKind::Coin,
                    tick,
                    x: s.player.x,
                });
            }
            Cell::MushroomBlock => {
                Arc::make_mut(&mut s.terrain).set(col, row, Cell::Solid);
                let id = s.next_id;
                s.next_id += 1;
                s.entities.push(Entity {
                    id,
                    kind: EntityKind::Mushroom,
                    x: col as f64 + 0.5,
                    y: row as f64,
                    vx: self.physics.mushroom_speed,
                    vy: 0.0,
                    grounded: true,
                    alive: true,
                    grace: 0,
                });
            }
            Cell::Brick if s.player.power == Power::Big => {
                Arc::make_mut(&mut s.terrain).set(col, row, Cell::Empty);
            }
            _ => {}
        }
    }

    fn advance_entity(
        &self,
        s: &mut GameState,
        i: usize,
        width: f64,
        height: f64,
        events: &mut Vec<MechanicEvent>,
        tick: u32,
    ) {
        let ph = &self.physics;
        let terrain = &*s.terrain;
        let e = &mut s.entities[i];
        if !e.alive {
            return;
        }
        if e.grace > 0 {
            e.grace -= 1;
        }
        let h = e.height(ph);
        let w = ph.enemy_width;

        if e.kind == EntityKind::WingedKoopa && e.grounded {
            e.vy = -ph.winged_hop;
        } else {
            e.vy = (e.vy + ph.gravity).min(ph.max_fall_speed);
        }

        // Red koopas turn around rather than walk off a ledge.
        if e.kind == EntityKind::RedKoopa && e.grounded && e.vx != 0.0 {
            let lead = e.x + e.vx + e.vx.signum() * w / 2.0;
            let below = e.y.round() as i64;
            if !terrain.solid(lead.floor() as i64, below) {
                e.vx = -e.vx;
            }
        }

        if move_x(terrain, &mut e.x, e.y, w, h, e.vx).hit {
            e.vx = -e.vx;
        }
        let vy = e.vy;
        let contact = move_y(terrain, e.x, &mut e.y, w, h, vy);
        e.grounded = contact.hit && vy > 0.0;
        if contact.hit {
            e.vy = 0.0;
        }

        if e.x < 0.0 || e.x > width || e.y - h > height {
            e.alive = false;
            match e.kind {
                k if k.is_enemy() => events.push(MechanicEvent {
                    kind: MechanicKind::FallKill,
                    tick,
                    x: s.player.x,
                }),
                EntityKind::Mushroom => s.lost_pickups += 1,
                _ => {}
            }
        }
    }

    fn resolve_shells(&self, s: &mut GameState, events: &mut Vec<MechanicEvent>, tick: u32) {
        let ph = &self.physics;
        for i in 0..s.entities.len() {
            let shell = &s.entities[i];
            if !shell.alive || shell.kind != EntityKind::Shell || shell.vx == 0.0 {
                continue;
            }
            let sb = Aabb::around(shell.x, shell.y, ph.enemy_width, shell.height(ph));
            for j in 0..s.entities.len() {
                if i == j {
                    continue;
                }
                let other = &s.entities[j];
                if !other.alive || !other.kind.is_hostile() {
                    continue;
                }
                let ob = Aabb::around(other.x, other.y, ph.enemy_width, other.height(ph));
                if sb.overlaps(&ob) {
                    let is_enemy = other.kind.is_enemy();
                    s.entities[j].alive = false;
                    if is_enemy {
                        events.push(MechanicEvent {
                            kind: MechanicKind::ShellKill,
                            tick,
                            x: s.player.x,
                        });
                    }
                }
            }
        }
    }

    /// Returns true when the player dies.
    fn resolve_player_contacts(
        &self,
        s: &mut GameState,
        prev_feet: f64,
        events: &mut Vec<MechanicEvent>,
        tick: u32,
    ) -> bool {
        let ph = &self.physics;
        let mut dead = false;
        for i in 0..s.entities.len() {
            let p = &s.player;
            let pb = Aabb::around(p.x, p.y, ph.player_width, p.height(ph));
            let e = &s.entities[i];
            if !e.alive {
                continue;
            }
            let eb = Aabb::around(e.x, e.y, ph.enemy_width, e.height(ph));
            if !pb.overlaps(&eb) {
                continue;
            }
            let from_above = p.vy > 0.0 && prev_feet <= eb.top + ph.stomp_tolerance;
            let kind = e.kind;
            let moving_shell = kind == EntityKind::Shell && e.vx != 0.0;
            match kind {
                EntityKind::Mushroom => {
                    s.entities[i].alive = false;
                    events.push(MechanicEvent {
                        kind: MechanicKind::Mushroom,
                        tick,
                        x: s.player.x,
                    });
                    s.player.power = Power::Big;
                }
                EntityKind::Shell if !moving_shell => {
                    let dir = if e.x >= p.x { 1.0 } else { -1.0 };
                    let e = &mut s.entities[i];
                    e.vx = dir * ph.shell_speed;
                    e.grace = ph.kick_grace;
                    if from_above {
                        s.player.vy = -ph.stomp_bounce;
                        s.player.y = eb.top;
                    }
                }
                _ if from_above => {
                    let e = &mut s.entities[i];
                    match kind {
                        EntityKind::Goomba => e.alive = false,
                        EntityKind::Shell => e.vx = 0.0,
                        _ => {
                            e.kind = EntityKind::Shell;
                            e.vx = 0.0;
                            e.grace = ph.kick_grace;
                        }
                    }
                    if kind.is_enemy() {
                        events.push(MechanicEvent {
                            kind: MechanicKind::Stomp,
                            tick,
                            x: s.player.x,
                        });
                    }
                    s.player.vy = -ph.stomp_bounce;
                    s.player.y = eb.top;
                }
                _ => {
                    if moving_shell && e.grace > 0 {
                        continue;
                    }
                    let p = &mut s.player;
                    if p.invulnerable > 0 {
                        continue;
                    }
                    match p.power {
                        Power::Big => {
                            p.power = Power::Small;
                            p.invulnerable = ph.invulnerable_ticks;
                        }
                        Power::Small => dead = true,
                    }
                }
            }
        }
        dead
    }
}
