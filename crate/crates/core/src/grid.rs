//! 4-connected grid maps and MovingAI `.map` / `.scen` parsing.

use std::fmt;

use smallvec::SmallVec;
use thiserror::Error;

/// A grid location. `row` indexes from the top, `col` from the left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct Cell {
    pub row: u32,
    pub col: u32,
}

impl Cell {
    pub const fn new(row: u32, col: u32) -> Self {
        Self { row, col }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// Neighbor list of a cell; the stay action plus at most four moves.
pub type Neighbors = SmallVec<[Cell; 5]>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GridError {
    #[error("line {line}: malformed header: {reason}")]
    Header { line: usize, reason: String },

    #[error("line {line}: row {row} has {found} cells, expected {expected}")]
    RowLength {
        line: usize,
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("line {line}: expected {expected} map rows, found {found}")]
    RowCount { line: usize, found: usize, expected: usize },

    #[error("line {line}: {reason}")]
    Scenario { line: usize, reason: String },
}

/// Passability grid. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    width: u32,
    height: u32,
    passable: Vec<bool>,
}

impl GridMap {
    /// Builds a map from a row-major passability vector.
    ///
    /// Panics if either dimension is zero or the vector length does not match.
    pub fn new(width: u32, height: u32, passable: Vec<bool>) -> Self {
        assert!(width > 0 && height > 0, "map dimensions must be positive");
        assert_eq!(passable.len(), width as usize * height as usize);
        Self {
            width,
            height,
            passable,
        }
    }

    /// An obstacle-free map.
    pub fn open(width: u32, height: u32) -> Self {
        Self::new(width, height, vec![true; width as usize * height as usize])
    }

    /// Builds a map from rows of map characters (`.`/`G` passable).
    ///
    /// Panics on ragged input; meant for tests and generated maps.
    pub fn from_rows<S: AsRef<str>>(rows: &[S]) -> Self {
        let height = rows.len() as u32;
        let width = rows.first().map_or(0, |r| r.as_ref().chars().count()) as u32;
        let mut passable = Vec::with_capacity(width as usize * height as usize);
        for row in rows {
            let row = row.as_ref();
            assert_eq!(row.chars().count() as u32, width, "ragged map rows");
            passable.extend(row.chars().map(is_passable_char));
        }
        Self::new(width, height, passable)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Total number of cells, passable or not.
    pub fn num_cells(&self) -> usize {
        self.passable.len()
    }

    pub fn num_passable(&self) -> usize {
        self.passable.iter().filter(|&&p| p).count()
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.row < self.height && cell.col < self.width
    }

    pub fn is_passable(&self, cell: Cell) -> bool {
        self.in_bounds(cell) && self.passable[self.index(cell)]
    }

    /// Row-major index of an in-bounds cell.
    #[inline]
    pub fn index(&self, cell: Cell) -> usize {
        cell.row as usize * self.width as usize + cell.col as usize
    }

    #[inline]
    pub fn cell_at(&self, index: usize) -> Cell {
        let w = self.width as usize;
        Cell::new((index / w) as u32, (index % w) as u32)
    }

    /// All passable cells in row-major order.
    pub fn passable_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.passable
            .iter()
            .enumerate()
            .filter(|(_, &p)| p)
            .map(|(i, _)| self.cell_at(i))
    }

    /// Stay plus passable 4-connected moves, in the order stay, up, right, down, left.
    pub fn neighbors(&self, s: Cell) -> Neighbors {
        let mut out = Neighbors::new();
        out.push(s);
        if s.row > 0 {
            self.push_if_passable(&mut out, Cell::new(s.row - 1, s.col));
        }
        if s.col + 1 < self.width {
            self.push_if_passable(&mut out, Cell::new(s.row, s.col + 1));
        }
        if s.row + 1 < self.height {
            self.push_if_passable(&mut out, Cell::new(s.row + 1, s.col));
        }
        if s.col > 0 {
            self.push_if_passable(&mut out, Cell::new(s.row, s.col - 1));
        }
        out
    }

    fn push_if_passable(&self, out: &mut Neighbors, c: Cell) {
        if self.passable[self.index(c)] {
            out.push(c);
        }
    }

    /// True when `b` is `a` or a 4-connected neighbor of `a`.
    pub fn is_unit_step(a: Cell, b: Cell) -> bool {
        a.row.abs_diff(b.row) + a.col.abs_diff(b.col) <= 1
    }

    /// Serializes to MovingAI `.map` text using `.` for passable and `@` for blocked.
    pub fn to_map_string(&self) -> String {
        let mut out = format!("type octile\nheight {}\nwidth {}\nmap\n", self.height, self.width);
        for row in self.passable.chunks(self.width as usize) {
            out.extend(row.iter().map(|&p| if p { '.' } else { '@' }));
            out.push('\n');
        }
        out
    }
}

/// Free-function form of [`GridMap::neighbors`].
pub fn neighbors(map: &GridMap, s: Cell) -> Neighbors {
    map.neighbors(s)
}

fn is_passable_char(c: char) -> bool {
    matches!(c, '.' | 'G')
}

/// Parses MovingAI `.map` text.
pub fn parse_map(text: &str) -> Result<GridMap, GridError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));

    let mut next_header = |what: &str| -> Result<(usize, &str), GridError> {
        lines.next().ok_or_else(|| GridError::Header {
            line: 0,
            reason: format!("missing `{what}` line"),
        })
    };

    let (line, ty) = next_header("type")?;
    if ty.split_whitespace().next() != Some("type") {
        return Err(GridError::Header {
            line,
            reason: format!("expected `type ...`, found {ty:?}"),
        });
    }

    let mut dims = [0u32; 2];
    for (slot, key) in dims.iter_mut().zip(["height", "width"]) {
        let (line, text) = next_header(key)?;
        let mut parts = text.split_whitespace();
        let value = match (parts.next(), parts.next(), parts.next()) {
            (Some(k), Some(v), None) if k == key => v.parse::<u32>().ok(),
            _ => None,
        };
        *slot = match value {
            Some(v) if v > 0 => v,
            _ => {
                return Err(GridError::Header {
                    line,
                    reason: format!("expected `{key} <positive integer>`, found {text:?}"),
                })
            }
        };
    }
    let [height, width] = dims;

    let (line, map_kw) = next_header("map")?;
    if map_kw.trim() != "map" {
        return Err(GridError::Header {
            line,
            reason: format!("expected `map`, found {map_kw:?}"),
        });
    }

    let mut passable = Vec::with_capacity(width as usize * height as usize);
    let mut rows = 0usize;
    let mut last_line = line;
    for (line, text) in lines {
        if rows == height as usize {
            if text.trim().is_empty() {
                continue;
            }
            return Err(GridError::RowCount {
                line,
                found: rows + 1,
                expected: height as usize,
            });
        }
        let found = text.chars().count();
        if found != width as usize {
            return Err(GridError::RowLength {
                line,
                row: rows,
                found,
                expected: width as usize,
            });
        }
        passable.extend(text.chars().map(is_passable_char));
        rows += 1;
        last_line = line;
    }
    if rows != height as usize {
        return Err(GridError::RowCount {
            line: last_line + 1,
            found: rows,
            expected: height as usize,
        });
    }
    Ok(GridMap::new(width, height, passable))
}

/// One agent task from a `.scen` file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioEntry {
    pub start: Cell,
    pub goal: Cell,
    /// Distance column of the file; informational only.
    pub reference_distance: f64,
}

/// Parses MovingAI `.scen` text against `map`. Columns are
/// bucket, map, width, height, start-x, start-y, goal-x, goal-y, distance,
/// where x is the column and y the row.
pub fn parse_scenario(text: &str, map: &GridMap) -> Result<Vec<ScenarioEntry>, GridError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let err = |line: usize, reason: String| GridError::Scenario { line, reason };

    match lines.next() {
        Some((_, first)) if first.trim().starts_with("version") => {}
        Some((line, first)) => return Err(err(line, format!("expected `version` header, found {first:?}"))),
        None => return Err(err(1, "empty scenario file".into())),
    }

    let mut entries = Vec::new();
    for (line, text) in lines {
        let text = text.trim_end_matches(['\r', '\n']);
        if text.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = text.split('\t').collect();
        if fields.len() != 9 {
            return Err(err(
                line,
                format!("expected 9 tab-separated fields, found {}", fields.len()),
            ));
        }
        let int = |i: usize, name: &str| -> Result<u32, GridError> {
            fields[i]
                .trim()
                .parse::<u32>()
                .map_err(|_| err(line, format!("invalid {name}: {:?}", fields[i])))
        };
        let (w, h) = (int(2, "map width")?, int(3, "map height")?);
        if w != map.width() || h != map.height() {
            return Err(err(
                line,
                format!(
                    "scenario map size {w}x{h} does not match map {}x{}",
                    map.width(),
                    map.height()
                ),
            ));
        }
        let start = Cell::new(int(5, "start y")?, int(4, "start x")?);
        let goal = Cell::new(int(7, "goal y")?, int(6, "goal x")?);
        let reference_distance = fields[8]
            .trim()
            .parse::<f64>()
            .map_err(|_| err(line, format!("invalid distance: {:?}", fields[8])))?;
        for (what, c) in [("start", start), ("goal", goal)] {
            if !map.is_passable(c) {
                return Err(err(line, format!("{what} {c} is not a passable cell")));
            }
        }
        entries.push(ScenarioEntry {
            start,
            goal,
            reference_distance,
        });
    }
    Ok(entries)
}

/// Serializes entries back to `.scen` text.
pub fn write_scenario(entries: &[ScenarioEntry], map: &GridMap, map_name: &str) -> String {
    let mut out = String::from("version 1\n");
    for (i, e) in entries.iter().enumerate() {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            i / 10,
            map_name,
            map.width(),
            map.height(),
            e.start.col,
            e.start.row,
            e.goal.col,
            e.goal.row,
            e.reference_distance
        ));
    }
    out
}
