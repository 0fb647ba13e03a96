//! Tiles, slices, scenes and the text format they share.
//!
//! A scene is a grid of `height` rows by `width` columns. The first and last
//! `padding` columns are floor slices that never change under the genetic
//! operators; the columns between them are the evolvable core.
//!
//! Text format: exactly `height` lines, one character per tile, every line the
//! same length. Row 0 is the top of the screen.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

pub const DEFAULT_HEIGHT: usize = 14;
pub const DEFAULT_CORE_WIDTH: usize = 14;
pub const DEFAULT_PADDING: usize = 3;
/// Rows of ground at the bottom of a floor slice.
pub const FLOOR_ROWS: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SceneError {
    #[error("expected {expected} lines, found {found}")]
    LineCount { expected: usize, found: usize },
    #[error("line {line} has length {found}, expected {expected}")]
    RaggedLine {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("scene width {width} is too narrow for padding {padding}")]
    TooNarrow { width: usize, padding: usize },
    #[error("unknown tile '{symbol}' at row {row}, col {col}")]
    UnknownTile { symbol: char, row: usize, col: usize },
    #[error("enemy '{symbol}' at row {row}, col {col} is not resting on a surface")]
    FloatingEnemy { symbol: char, row: usize, col: usize },
    #[error("slice has {found} tiles, expected {expected}")]
    SliceHeight { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TileCategory {
    Solid,
    Breakable,
    QuestionBlock,
    Coin,
    PipePart,
    EnemySpawn,
    Empty,
}

/// One cell of the tile alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Tile {
    Empty,
    Ground,
    Breakable,
    CoinBlock,
    MushroomBlock,
    Coin,
    PipeTopLeft,
    PipeTopRight,
    PipeLeft,
    PipeRight,
    Goomba,
    GreenKoopa,
    RedKoopa,
    WingedKoopa,
}

impl Tile {
    pub const ALL: [Tile; 14] = [
        Tile::Empty,
        Tile::Ground,
        Tile::Breakable,
        Tile::CoinBlock,
        Tile::MushroomBlock,
        Tile::Coin,
        Tile::PipeTopLeft,
        Tile::PipeTopRight,
        Tile::PipeLeft,
        Tile::PipeRight,
        Tile::Goomba,
        Tile::GreenKoopa,
        Tile::RedKoopa,
        Tile::WingedKoopa,
    ];

    pub fn from_symbol(symbol: char) -> Option<Tile> {
        Some(match symbol {
            '-' => Tile::Empty,
            'X' => Tile::Ground,
            'S' => Tile::Breakable,
            '?' => Tile::CoinBlock,
            'M' => Tile::MushroomBlock,
            'o' => Tile::Coin,
            '<' => Tile::PipeTopLeft,
            '>' => Tile::PipeTopRight,
            '[' => Tile::PipeLeft,
            ']' => Tile::PipeRight,
            'g' => Tile::Goomba,
            'k' => Tile::GreenKoopa,
            'r' => Tile::RedKoopa,
            'K' => Tile::WingedKoopa,
            _ => return None,
        })
    }

    pub fn symbol(self) -> char {
        match self {
            Tile::Empty => '-',
            Tile::Ground => 'X',
            Tile::Breakable => 'S',
            Tile::CoinBlock => '?',
            Tile::MushroomBlock => 'M',
            Tile::Coin => 'o',
            Tile::PipeTopLeft => '<',
            Tile::PipeTopRight => '>',
            Tile::PipeLeft => '[',
            Tile::PipeRight => ']',
            Tile::Goomba => 'g',
            Tile::GreenKoopa => 'k',
            Tile::RedKoopa => 'r',
            Tile::WingedKoopa => 'K',
        }
    }

    pub fn category(self) -> TileCategory {
        match self {
            Tile::Empty => TileCategory::Empty,
            Tile::Ground => TileCategory::Solid,
            Tile::Breakable => TileCategory::Breakable,
            Tile::CoinBlock | Tile::MushroomBlock => TileCategory::QuestionBlock,
            Tile::Coin => TileCategory::Coin,
            Tile::PipeTopLeft | Tile::PipeTopRight | Tile::PipeLeft | Tile::PipeRight => {
                TileCategory::PipePart
            }
            Tile::Goomba | Tile::GreenKoopa | Tile::RedKoopa | Tile::WingedKoopa => {
                TileCategory::EnemySpawn
            }
        }
    }

    /// Tiles the player and entities collide with.
    pub fn is_solid(self) -> bool {
        matches!(
            self.category(),
            TileCategory::Solid
                | TileCategory::Breakable
                | TileCategory::QuestionBlock
                | TileCategory::PipePart
        )
    }

    pub fn is_enemy(self) -> bool {
        self.category() == TileCategory::EnemySpawn
    }

    pub fn description(self) -> &'static str {
        match self {
            Tile::Empty => "empty",
            Tile::Ground => "ground",
            Tile::Breakable => "breakable brick",
            Tile::CoinBlock => "question block (coin)",
            Tile::MushroomBlock => "question block (mushroom)",
            Tile::Coin => "coin",
            Tile::PipeTopLeft => "pipe top, left",
            Tile::PipeTopRight => "pipe top, right",
            Tile::PipeLeft => "pipe body, left",
            Tile::PipeRight => "pipe body, right",
            Tile::Goomba => "goomba",
            Tile::GreenKoopa => "green koopa",
            Tile::RedKoopa => "red koopa",
            Tile::WingedKoopa => "winged green koopa",
        }
    }
}

impl fmt::Display for Tile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// A vertical column of tiles, top to bottom.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slice(Box<[Tile]>);

impl Slice {
    /// Builds a slice, rejecting enemies that do not rest on a surface.
    /// Winged koopas fly and are exempt.
    pub fn new(tiles: Vec<Tile>) -> Result<Slice, SceneError> {
        for (row, &tile) in tiles.iter().enumerate() {
            if tile.is_enemy() && tile != Tile::WingedKoopa {
                let supported = tiles.get(row + 1).is_some_and(|below| below.is_solid());
                if !supported {
                    return Err(SceneError::FloatingEnemy {
                        symbol: tile.symbol(),
                        row,
                        col: 0,
                    });
                }
            }
        }
        Ok(Slice(tiles.into_boxed_slice()))
    }

    /// Empty sky above `FLOOR_ROWS` rows of ground.
    pub fn floor(height: usize) -> Slice {
        let ground = FLOOR_ROWS.min(height);
        let tiles = (0..height)
            .map(|r| {
                if r >= height - ground {
                    Tile::Ground
                } else {
                    Tile::Empty
                }
            })
            .collect::<Vec<_>>();
        Slice(tiles.into_boxed_slice())
    }

    pub fn filled(height: usize, tile: Tile) -> Slice {
        Slice(vec![tile; height].into_boxed_slice())
    }

    pub fn height(&self) -> usize {
        self.0.len()
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.0
    }

    pub fn get(&self, row: usize) -> Tile {
        self.0[row]
    }

    /// Top-to-bottom symbols, one character per row.
    pub fn to_symbols(&self) -> String {
        self.0.iter().map(|t| t.symbol()).collect()
    }

    pub fn from_symbols(symbols: &str) -> Result<Slice, SceneError> {
        let tiles = symbols
            .chars()
            .enumerate()
            .map(|(row, c)| {
                Tile::from_symbol(c).ok_or(SceneError::UnknownTile {
                    symbol: c,
                    row,
                    col: 0,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Slice::new(tiles)
    }
}

/// Parses a tile grid of `height` rows without interpreting padding.
/// Returns the columns left to right.
pub fn parse_grid(text: &str, height: usize) -> Result<Vec<Slice>, SceneError> {
    let lines: Vec<&str> = text.lines().collect();
    if lines.len() != height {
        return Err(SceneError::LineCount {
            expected: height,
            found: lines.len(),
        });
    }
    let width = lines[0].chars().count();
    let mut columns = vec![Vec::with_capacity(height); width];
    for (row, line) in lines.iter().enumerate() {
        let len = line.chars().count();
        if len != width {
            return Err(SceneError::RaggedLine {
                line: row,
                expected: width,
                found: len,
            });
        }
        for (col, c) in line.chars().enumerate() {
            let tile =
                Tile::from_symbol(c).ok_or(SceneError::UnknownTile { symbol: c, row, col })?;
            columns[col].push(tile);
        }
    }
    columns
        .into_iter()
        .enumerate()
        .map(|(col, tiles)| {
            Slice::new(tiles).map_err(|e| match e {
                SceneError::FloatingEnemy { symbol, row, .. } => {
                    SceneError::FloatingEnemy { symbol, row, col }
                }
                other => other,
            })
        })
        .collect()
}

/// A playable scene: core slices framed by floor padding on both sides.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scene {
    height: usize,
    padding: usize,
    columns: Vec<Slice>,
}

impl Scene {
    /// Frames `core` with `padding` floor slices on each side.
    pub fn from_core(core: &[Slice], padding: usize) -> Result<Scene, SceneError> {
        let height = core.first().map(Slice::height).unwrap_or(DEFAULT_HEIGHT);
        if let Some(bad) = core.iter().find(|s| s.height() != height) {
            return Err(SceneError::SliceHeight {
                expected: height,
                found: bad.height(),
            });
        }
        let floor = Slice::floor(height);
        let mut columns = Vec::with_capacity(core.len() + 2 * padding);
        columns.extend(std::iter::repeat_n(floor.clone(), padding));
        columns.extend(core.iter().cloned());
        columns.extend(std::iter::repeat_n(floor, padding));
        Ok(Scene {
            height,
            padding,
            columns,
        })
    }

    /// A scene whose core is entirely floor.
    pub fn flat(height: usize, core_width: usize, padding: usize) -> Scene {
        let core = vec![Slice::floor(height); core_width];
        Scene::from_core(&core, padding).expect("floor slices share a height")
    }

    pub fn parse(text: &str) -> Result<Scene, SceneError> {
        Scene::parse_with(text, DEFAULT_HEIGHT, DEFAULT_PADDING)
    }

    pub fn parse_with(text: &str, height: usize, padding: usize) -> Result<Scene, SceneError> {
        let columns = parse_grid(text, height)?;
        if columns.len() < 2 * padding + 1 {
            return Err(SceneError::TooNarrow {
                width: columns.len(),
                padding,
            });
        }
        Ok(Scene {
            height,
            padding,
            columns,
        })
    }

    pub fn serialize(&self) -> String {
        let mut out = String::with_capacity((self.width() + 1) * self.height);
        for row in 0..self.height {
            for col in &self.columns {
                out.push(col.get(row).symbol());
            }
            out.push('\n');
        }
        out
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Total width in tiles, padding included. This is also the scene length
    /// used to normalise traversed distances.
    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn padding(&self) -> usize {
        self.padding
    }

    pub fn core_width(&self) -> usize {
        self.columns.len() - 2 * self.padding
    }

    pub fn columns(&self) -> &[Slice] {
        &self.columns
    }

    pub fn core(&self) -> &[Slice] {
        &self.columns[self.padding..self.columns.len() - self.padding]
    }

    pub fn tile(&self, row: usize, col: usize) -> Tile {
        self.columns[col].get(row)
    }

    pub fn tiles(&self) -> impl Iterator<Item = Tile> + '_ {
        self.columns.iter().flat_map(|c| c.tiles().iter().copied())
    }

    pub fn count(&self, pred: impl Fn(Tile) -> bool) -> usize {
        self.tiles().filter(|&t| pred(t)).count()
    }

    /// Mirror image, left to right.
    pub fn mirrored(&self) -> Scene {
        let mut columns = self.columns.clone();
        columns.reverse();
        Scene {
            height: self.height,
            padding: self.padding,
            columns,
        }
    }
}

impl fmt::Display for Scene {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

/// Entropy terms and the combined simplicity score of a scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitnessReport {
    pub tile_entropy: f64,
    pub change_entropy: f64,
    pub fitness: f64,
}

pub const TILE_ENTROPY_WEIGHT: f64 = 0.2;
pub const CHANGE_ENTROPY_WEIGHT: f64 = 0.8;

fn normalized_entropy(counts: impl IntoIterator<Item = usize>) -> f64 {
    let counts: Vec<usize> = counts.into_iter().filter(|&c| c > 0).collect();
    if counts.len() <= 1 {
        return 0.0;
    }
    let total: usize = counts.iter().sum();
    let total = total as f64;
    let h: f64 = counts
        .iter()
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum();
    (h / (counts.len() as f64).ln()).clamp(0.0, 1.0)
}

/// Simplicity fitness: low tile-type entropy and, weighted more heavily, few
/// horizontal tile changes.
///
/// Tile entropy is normalised by the log of the number of distinct symbols
/// present. Change entropy is the entropy of the changed/unchanged split over
/// all horizontally adjacent pairs, normalised by log 2.
pub fn entropy_fitness(scene: &Scene) -> FitnessReport {
    let mut freq: BTreeMap<Tile, usize> = BTreeMap::new();
    for t in scene.tiles() {
        *freq.entry(t).or_default() += 1;
    }
    let tile_entropy = normalized_entropy(freq.values().copied());

    let mut changed = 0usize;
    let mut same = 0usize;
    for pair in scene.columns().windows(2) {
        for (a, b) in pair[0].tiles().iter().zip(pair[1].tiles()) {
            if a == b {
                same += 1;
            } else {
                changed += 1;
            }
        }
    }
    let change_entropy = normalized_entropy([changed, same]);

    FitnessReport {
        tile_entropy,
        change_entropy,
        fitness: TILE_ENTROPY_WEIGHT * (1.0 - tile_entropy)
            + CHANGE_ENTROPY_WEIGHT * (1.0 - change_entropy),
    }
}
