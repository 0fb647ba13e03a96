use std::sync::Arc;

use super::physics::PhysicsConfig;
use crate::scene::{Scene, Tile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Left,
    None,
    Right,
}

/// One tick of controller input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Action {
    pub direction: Direction,
    pub jump: bool,
    pub run: bool,
}

impl Action {
    pub const IDLE: Action = Action {
        direction: Direction::None,
        jump: false,
        run: false,
    };

    pub fn new(direction: Direction, jump: bool, run: bool) -> Action {
        Action {
            direction,
            jump,
            run,
        }
    }

    /// All 12 button combinations. Non-jumping actions come first and the
    /// rightward ones lead, which fixes the planner's tie-breaking order.
    pub fn all() -> Vec<Action> {
        let mut out = Vec::with_capacity(12);
        for jump in [false, true] {
            for direction in [Direction::Right, Direction::None, Direction::Left] {
                for run in [true, false] {
                    out.push(Action::new(direction, jump, run));
                }
            }
        }
        out
    }

    /// Compact label such as `R+J+B` (right, jump, run).
    pub fn label(&self) -> String {
        let mut s = String::from(match self.direction {
            Direction::Left => "L",
            Direction::None => "-",
            Direction::Right => "R",
        });
        if self.jump {
            s.push_str("+J");
        }
        if self.run {
            s.push_str("+B");
        }
        s
    }
}

/// Runtime cell contents. Blocks change as they are bumped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Empty,
    Solid,
    Brick,
    CoinBlock,
    MushroomBlock,
    Coin,
}

impl Cell {
    pub fn is_solid(self) -> bool {
        !matches!(self, Cell::Empty | Cell::Coin)
    }

    pub fn is_pickup(self) -> bool {
        matches!(self, Cell::Coin | Cell::CoinBlock | Cell::MushroomBlock)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Terrain {
    width: usize,
    height: usize,
    cells: Vec<Cell>,
    /// Number of cell mutations so far.
    pub version: u32,
}

impl Terrain {
    pub fn from_scene(scene: &Scene) -> Terrain {
        let (width, height) = (scene.width(), scene.height());
        let mut cells = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                cells.push(match scene.tile(row, col) {
                    Tile::Empty
                    | Tile::Goomba
                    | Tile::GreenKoopa
                    | Tile::RedKoopa
                    | Tile::WingedKoopa => Cell::Empty,
                    Tile::Breakable => Cell::Brick,
                    Tile::CoinBlock => Cell::CoinBlock,
                    Tile::MushroomBlock => Cell::MushroomBlock,
                    Tile::Coin => Cell::Coin,
                    Tile::Ground
                    | Tile::PipeTopLeft
                    | Tile::PipeTopRight
                    | Tile::PipeLeft
                    | Tile::PipeRight => Cell::Solid,
                });
            }
        }
        Terrain {
            width,
            height,
            cells,
            version: 0,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Cells outside the grid are empty.
    pub fn get(&self, col: i64, row: i64) -> Cell {
        if col < 0 || row < 0 || col as usize >= self.width || row as usize >= self.height {
            return Cell::Empty;
        }
        self.cells[row as usize * self.width + col as usize]
    }

    pub fn set(&mut self, col: i64, row: i64, cell: Cell) {
        if col < 0 || row < 0 || col as usize >= self.width || row as usize >= self.height {
            return;
        }
        self.cells[row as usize * self.width + col as usize] = cell;
        self.version += 1;
    }

    pub fn solid(&self, col: i64, row: i64) -> bool {
        self.get(col, row).is_solid()
    }

    pub fn pickups(&self) -> usize {
        self.cells.iter().filter(|c| c.is_pickup()).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Power {
    Small,
    Big,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Player {
    /// Horizontal centre.
    pub x: f64,
    /// Feet.
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub grounded: bool,
    pub power: Power,
    /// Hold ticks left in the current jump.
    pub jump_hold_remaining: u32,
    /// Hold ticks used in the current jump.
    pub jump_hold_used: u32,
    /// Jump button was up on the previous tick; a new jump needs a fresh press.
    pub jump_released: bool,
    pub invulnerable: u32,
    /// Take-off point of the current airborne phase, if it began with a jump.
    pub jump_origin: Option<(f64, f64)>,
    pub high_jump_fired: bool,
    pub speeding: bool,
}

impl Player {
    pub fn height(&self, physics: &PhysicsConfig) -> f64 {
        match self.power {
            Power::Small => physics.small_height,
            Power::Big => physics.big_height,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EntityKind {
    Goomba,
    GreenKoopa,
    RedKoopa,
    WingedKoopa,
    Shell,
    Mushroom,
}

impl EntityKind {
    /// Walking enemies. Shells are hazards but not counted as enemies.
    pub fn is_enemy(self) -> bool {
        matches!(
            self,
            EntityKind::Goomba | EntityKind::GreenKoopa | EntityKind::RedKoopa | EntityKind::WingedKoopa
        )
    }

    pub fn is_hostile(self) -> bool {
        self.is_enemy() || self == EntityKind::Shell
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entity {
    pub id: u32,
    pub kind: EntityKind,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub grounded: bool,
    pub alive: bool,
    /// Kick grace ticks for shells.
    pub grace: u32,
}

impl Entity {
    pub fn height(&self, physics: &PhysicsConfig) -> f64 {
        match self.kind {
            EntityKind::Shell | EntityKind::Mushroom => physics.shell_height,
            _ => physics.enemy_height,
        }
    }

    pub fn top(&self, physics: &PhysicsConfig) -> f64 {
        self.y - self.height(physics)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameState {
    pub player: Player,
    pub entities: Vec<Entity>,
    pub terrain: Arc<Terrain>,
    pub tick: u32,
    /// Furthest player x reached, capped at the scene width.
    pub max_x: f64,
    /// Pickups that left the scene without being collected.
    pub lost_pickups: u32,
    pub next_id: u32,
}

impl GameState {
    /// Player standing on the floor at the spawn column, enemies at their
    /// spawn tiles facing left.
    pub fn new(scene: &Scene, physics: &PhysicsConfig) -> GameState {
        let terrain = Terrain::from_scene(scene);
        let height = scene.height() as i64;
        let col = physics.spawn_x.floor() as i64;
        let floor_row = (0..height).find(|&r| terrain.solid(col, r)).unwrap_or(height);
        let mut entities = Vec::new();
        let mut next_id = 0;
        for c in 0..scene.width() {
            for r in 0..scene.height() {
                let kind = match scene.tile(r, c) {
                    Tile::Goomba => EntityKind::Goomba,
                    Tile::GreenKoopa => EntityKind::GreenKoopa,
                    Tile::RedKoopa => EntityKind::RedKoopa,
                    Tile::WingedKoopa => EntityKind::WingedKoopa,
                    _ => continue,
                };
                entities.push(Entity {
                    id: next_id,
                    kind,
                    x: c as f64 + 0.5,
                    y: r as f64 + 1.0,
                    vx: -physics.enemy_speed,
                    vy: 0.0,
                    grounded: false,
                    alive: true,
                    grace: 0,
                });
                next_id += 1;
            }
        }
        GameState {
            player: Player {
                x: physics.spawn_x,
                y: floor_row as f64,
                vx: 0.0,
                vy: 0.0,
                grounded: true,
                power: Power::Small,
                jump_hold_remaining: 0,
                jump_hold_used: 0,
                jump_released: true,
                invulnerable: 0,
                jump_origin: None,
                high_jump_fired: false,
                speeding: false,
            },
            entities,
            terrain: Arc::new(terrain),
            tick: 0,
            max_x: physics.spawn_x,
            lost_pickups: 0,
            next_id,
        }
    }

    pub fn width(&self) -> f64 {
        self.terrain.width() as f64
    }

    pub fn height(&self) -> f64 {
        self.terrain.height() as f64
    }

    pub fn live_enemies(&self) -> usize {
        self.entities
            .iter()
            .filter(|e| e.alive && e.kind.is_enemy())
            .count()
    }

    /// Coins, unopened question blocks and loose mushrooms.
    pub fn pickups(&self) -> usize {
        self.terrain.pickups()
            + self
                .entities
                .iter()
                .filter(|e| e.alive && e.kind == EntityKind::Mushroom)
                .count()
    }

    pub fn has_won(&self) -> bool {
        self.player.x >= self.width()
    }
}
