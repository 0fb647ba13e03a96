//! Slice harvesting and frequency-weighted slice sampling.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use thiserror::Error;

use crate::scene::{parse_grid, SceneError, Slice, Tile};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{name}: {error}")]
    Level { name: String, error: SceneError },
    #[error("slice bank is empty")]
    EmptyBank,
    #[error("io error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("mapping line {line}: {message}")]
    Mapping { line: usize, message: String },
}

/// Sample levels bundled with the crate, as `(name, text)` pairs.
pub fn sample_levels() -> Vec<(&'static str, &'static str)> {
    vec![
        ("overworld-1.txt", include_str!("../corpus/overworld-1.txt")),
        ("overworld-2.txt", include_str!("../corpus/overworld-2.txt")),
        ("overworld-3.txt", include_str!("../corpus/overworld-3.txt")),
        ("underground-1.txt", include_str!("../corpus/underground-1.txt")),
        ("athletic-1.txt", include_str!("../corpus/athletic-1.txt")),
        ("castle-1.txt", include_str!("../corpus/castle-1.txt")),
        ("overworld-4.txt", include_str!("../corpus/overworld-4.txt")),
    ]
}

/// Multiset of distinct slices with occurrence counts.
#[derive(Debug, Clone)]
pub struct SliceBank {
    entries: Vec<(Slice, u64)>,
    cumulative: Vec<u64>,
    total: u64,
}

impl SliceBank {
    /// Aggregates counts; entries keep first-seen order so sampling is
    /// reproducible across platforms.
    pub fn from_counts(counts: impl IntoIterator<Item = (Slice, u64)>) -> SliceBank {
        let mut index: HashMap<Slice, usize> = HashMap::new();
        let mut entries: Vec<(Slice, u64)> = Vec::new();
        for (slice, count) in counts {
            if count == 0 {
                continue;
            }
            match index.get(&slice) {
                Some(&i) => entries[i].1 += count,
                None => {
                    index.insert(slice.clone(), entries.len());
                    entries.push((slice, count));
                }
            }
        }
        let mut cumulative = Vec::with_capacity(entries.len());
        let mut total = 0;
        for (_, c) in &entries {
            total += c;
            cumulative.push(total);
        }
        SliceBank {
            entries,
            cumulative,
            total,
        }
    }

    pub fn entries(&self) -> &[(Slice, u64)] {
        &self.entries
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn unique(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn height(&self) -> Option<usize> {
        self.entries.first().map(|(s, _)| s.height())
    }

    pub fn count_of(&self, slice: &Slice) -> u64 {
        self.entries
            .iter()
            .find(|(s, _)| s == slice)
            .map_or(0, |(_, c)| *c)
    }

    /// Draws a slice with probability proportional to its count.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<&Slice, CorpusError> {
        if self.total == 0 {
            return Err(CorpusError::EmptyBank);
        }
        let ticket = rng.random_range(0..self.total);
        let i = self.cumulative.partition_point(|&c| c <= ticket);
        Ok(&self.entries[i].0)
    }

    /// One line per distinct slice: `count<TAB>symbols` (top to bottom).
    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|(s, c)| format!("{c}\t{}\n", s.to_symbols()))
            .collect()
    }
}

/// Every column of every level becomes one slice occurrence.
pub fn extract_slices<'a>(
    levels: impl IntoIterator<Item = (&'a str, &'a str)>,
    height: usize,
) -> Result<SliceBank, CorpusError> {
    let mut all = Vec::new();
    for (name, text) in levels {
        let columns = parse_grid(text, height).map_err(|error| CorpusError::Level {
            name: name.to_string(),
            error,
        })?;
        all.extend(columns.into_iter().map(|s| (s, 1)));
    }
    Ok(SliceBank::from_counts(all))
}

pub fn sample_bank(height: usize) -> Result<SliceBank, CorpusError> {
    extract_slices(sample_levels(), height)
}

/// Reads every `*.txt` file in `dir` (sorted by name) as a level.
pub fn read_corpus_dir(dir: &Path) -> Result<Vec<(String, String)>, CorpusError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CorpusError::Io { path, source }
    };
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "txt"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let text = fs::read_to_string(&p).map_err(io(&p))?;
            let name = p.file_name().unwrap_or_default().to_string_lossy().into_owned();
            Ok((name, text))
        })
        .collect()
}

/// Character translation from an external level corpus into the tile
/// alphabet. Plain text, one `source = target` pair per line, `#` comments.
#[derive(Debug, Clone, Default)]
pub struct SymbolMapping {
    map: HashMap<char, char>,
}

impl SymbolMapping {
    pub fn parse(text: &str) -> Result<SymbolMapping, CorpusError> {
        let mut map = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: &str| CorpusError::Mapping {
                line: i + 1,
                message: message.to_string(),
            };
            let (src, dst) = line.split_once('=').ok_or_else(|| err("expected `a = b`"))?;
            let (src, dst) = (src.trim(), dst.trim());
            let mut s = src.chars();
            let mut d = dst.chars();
            let (Some(sc), None, Some(dc), None) = (s.next(), s.next(), d.next(), d.next()) else {
                return Err(err("each side must be a single character"));
            };
            if Tile::from_symbol(dc).is_none() {
                return Err(err(&format!("'{dc}' is not a tile symbol")));
            }
            map.insert(sc, dc);
        }
        Ok(SymbolMapping { map })
    }

    /// Characters without an entry pass through unchanged.
    pub fn apply(&self, text: &str) -> String {
        text.chars()
            .map(|c| self.map.get(&c).copied().unwrap_or(c))
            .collect()
    }
}

/// Distinct columns of raw level text, counted before any symbol mapping.
pub fn raw_column_stats<'a>(
    levels: impl IntoIterator<Item = &'a str>,
) -> (usize, usize) {
    let mut seen = std::collections::HashSet::new();
    let mut total = 0;
    for text in levels {
        let rows: Vec<Vec<char>> = text.lines().map(|l| l.chars().collect()).collect();
        let width = rows.iter().map(Vec::len).min().unwrap_or(0);
        for c in 0..width {
            seen.insert(rows.iter().map(|r| r[c]).collect::<String>());
            total += 1;
        }
    }
    (total, seen.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn level(width: usize, col: &str) -> String {
        let rows: Vec<char> = col.chars().collect();
        rows.iter()
            .map(|&c| std::iter::repeat_n(c, width).collect::<String>() + "\n")
            .collect()
    }

    const FLOOR: &str = "------------XX";
    const BRICK: &str = "--------S---XX";

    #[test]
    fn identical_columns_aggregate() {
        let text = level(100, FLOOR);
        let bank = extract_slices([("a", text.as_str())], 14).unwrap();
        assert_eq!(bank.unique(), 1);
        assert_eq!(bank.total(), 100);
        assert_eq!(bank.entries()[0].1, 100);
    }

    #[test]
    fn totals_add_across_levels() {
        let a = level(50, FLOOR);
        let b = level(30, BRICK);
        let bank = extract_slices([("a", a.as_str()), ("b", b.as_str())], 14).unwrap();
        assert_eq!(bank.total(), 80);
        assert_eq!(bank.unique(), 2);
    }

    #[test]
    fn malformed_level_names_the_file() {
        let bad = level(10, FLOOR).replacen('-', "@", 1);
        let err = extract_slices([("broken.txt", bad.as_str())], 14).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("broken.txt"), "{msg}");
        assert!(msg.contains("row 0"), "{msg}");
    }

    #[test]
    fn single_entry_bank_always_returns_it() {
        let s = Slice::from_symbols(FLOOR).unwrap();
        let bank = SliceBank::from_counts([(s.clone(), 7)]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            assert_eq!(bank.sample(&mut rng).unwrap(), &s);
        }
    }

    #[test]
    fn empty_bank_errors() {
        let bank = SliceBank::from_counts([]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(bank.sample(&mut rng), Err(CorpusError::EmptyBank)));
    }

    #[test]
    fn sampling_is_reproducible() {
        let bank = sample_bank(14).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..200)
                .map(|_| bank.sample(&mut rng).unwrap().clone())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(11), draw(11));
    }

    #[test]
    fn three_to_one_bank_frequency() {
        // Binomial(10000, 0.75): sd = 43.3, so [0.73, 0.77] is > 4.6 sd wide
        // on each side.
        let a = Slice::from_symbols(FLOOR).unwrap();
        let b = Slice::from_symbols(BRICK).unwrap();
        let bank = SliceBank::from_counts([(a.clone(), 3), (b, 1)]);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let hits = (0..10_000)
            .filter(|_| bank.sample(&mut rng).unwrap() == &a)
            .count();
        let freq = hits as f64 / 10_000.0;
        assert!((0.73..=0.77).contains(&freq), "{freq}");
    }

    #[test]
    fn mapping_translates_symbols() {
        let m = SymbolMapping::parse("# comment\nE = g\nQ = X\n").unwrap();
        assert_eq!(m.apply("-EQ?"), "-gX?");
        assert!(SymbolMapping::parse("E = @").is_err());
        assert!(SymbolMapping::parse("EE = g").is_err());
    }

    #[test]
    fn bundled_corpus_parses() {
        let bank = sample_bank(14).unwrap();
        let widths: usize = sample_levels()
            .iter()
            .map(|(_, t)| t.lines().next().unwrap().len())
            .sum();
        assert_eq!(bank.total() as usize, widths);
        assert!(bank.unique() > 20);
    }
}
