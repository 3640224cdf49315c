//! Canonical data model for grids and tasks: ARC JSON ingestion/emission,
//! the color palette, and the geometric transforms used by the orientation
//! experiments.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest grid dimension accepted on load (ARC convention).
pub const MAX_DIM: usize = 30;

/// One of the ten cell colors, coded 0–9. Code 0 is the background color.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Color(u8);

impl Color {
    pub const BACKGROUND: Color = Color(0);

    pub fn new(code: u8) -> Result<Self, SchemaError> {
        if code > 9 {
            return Err(SchemaError {
                path: String::new(),
                kind: SchemaErrorKind::ColorOutOfRange(code),
            });
        }
        Ok(Color(code))
    }

    pub fn code(self) -> u8 {
        self.0
    }

    /// All ten colors in code order.
    pub fn all() -> impl Iterator<Item = Color> {
        (0..=9).map(Color)
    }
}

impl TryFrom<u8> for Color {
    type Error = SchemaError;
    fn try_from(code: u8) -> Result<Self, Self::Error> {
        Color::new(code)
    }
}

impl From<Color> for u8 {
    fn from(c: Color) -> u8 {
        c.0
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Rotation direction for [`Grid::rotate90`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rotation {
    Clockwise,
    Counterclockwise,
}

/// Rectangular matrix of colors, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Grid {
    height: usize,
    width: usize,
    cells: Vec<Color>,
}

impl Grid {
    pub fn new(height: usize, width: usize, cells: Vec<Color>) -> Result<Self, SchemaError> {
        if height == 0 || width == 0 || height > MAX_DIM || width > MAX_DIM {
            return Err(SchemaError {
                path: String::new(),
                kind: SchemaErrorKind::BadDimensions { height, width },
            });
        }
        if cells.len() != height * width {
            return Err(SchemaError {
                path: String::new(),
                kind: SchemaErrorKind::CellCountMismatch {
                    expected: height * width,
                    got: cells.len(),
                },
            });
        }
        Ok(Grid { height, width, cells })
    }

    /// Build a grid from rows of raw color codes, validating shape and range.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self, SchemaError> {
        let height = rows.len();
        let width = rows.first().map(|r| r.len()).unwrap_or(0);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(SchemaError {
                    path: format!("row {i}"),
                    kind: SchemaErrorKind::RaggedRows {
                        expected: width,
                        got: row.len(),
                    },
                });
            }
        }
        let mut cells = Vec::with_capacity(height * width);
        for (i, row) in rows.iter().enumerate() {
            for &code in row {
                cells.push(Color::new(code).map_err(|e| e.at(format!("row {i}")))?);
            }
        }
        Grid::new(height, width, cells)
    }

    /// Convenience constructor for one-row grids.
    pub fn single_row(codes: Vec<u8>) -> Result<Self, SchemaError> {
        Grid::from_rows(&[codes])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn get(&self, row: usize, col: usize) -> Color {
        debug_assert!(row < self.height && col < self.width);
        self.cells[row * self.width + col]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Color]> {
        self.cells.chunks(self.width)
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        self.rows()
            .map(|r| r.iter().map(|c| c.code()).collect())
            .collect()
    }

    pub fn cells(&self) -> &[Color] {
        &self.cells
    }

    /// Rotate by 90 degrees. Clockwise: `out[r][c] = self[h-1-c][r]`.
    pub fn rotate90(&self, direction: Rotation) -> Grid {
        let (h, w) = (self.height, self.width);
        let mut cells = Vec::with_capacity(h * w);
        match direction {
            Rotation::Clockwise => {
                for r in 0..w {
                    for c in 0..h {
                        cells.push(self.get(h - 1 - c, r));
                    }
                }
            }
            Rotation::Counterclockwise => {
                for r in 0..w {
                    for c in 0..h {
                        cells.push(self.get(c, w - 1 - r));
                    }
                }
            }
        }
        Grid {
            height: w,
            width: h,
            cells,
        }
    }

    /// Count of cells per color code.
    pub fn color_histogram(&self) -> [usize; 10] {
        let mut hist = [0usize; 10];
        for c in &self.cells {
            hist[c.code() as usize] += 1;
        }
        hist
    }
}

/// True iff dimensions and all cells are equal.
pub fn grids_equal(a: &Grid, b: &Grid) -> bool {
    a == b
}

/// One input/output example. Ground-truth outputs are always present.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaskPair {
    pub input: Grid,
    pub output: Grid,
}

/// A full task: non-empty train and test pair lists plus an identifier.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Task {
    pub id: String,
    pub train: Vec<TaskPair>,
    pub test: Vec<TaskPair>,
}

#[derive(Debug, Deserialize, Serialize)]
struct RawPair {
    input: Vec<Vec<u8>>,
    output: Vec<Vec<u8>>,
}

#[derive(Debug, Deserialize, Serialize)]
struct RawTask {
    train: Vec<RawPair>,
    test: Vec<RawPair>,
}

impl Task {
    /// Parse a task from an ARC JSON document.
    ///
    /// Errors name the offending path, e.g. `train[0].input`.
    pub fn from_json(id: &str, json: &str) -> Result<Task, SchemaError> {
        let raw: RawTask = serde_json::from_str(json).map_err(|e| SchemaError {
            path: String::new(),
            kind: SchemaErrorKind::Json(e.to_string()),
        })?;
        if raw.train.is_empty() {
            return Err(SchemaError {
                path: "train".into(),
                kind: SchemaErrorKind::Empty,
            });
        }
        if raw.test.is_empty() {
            return Err(SchemaError {
                path: "test".into(),
                kind: SchemaErrorKind::Empty,
            });
        }
        let convert = |pairs: &[RawPair], section: &str| -> Result<Vec<TaskPair>, SchemaError> {
            pairs
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let input = Grid::from_rows(&p.input)
                        .map_err(|e| e.at(format!("{section}[{i}].input")))?;
                    let output = Grid::from_rows(&p.output)
                        .map_err(|e| e.at(format!("{section}[{i}].output")))?;
                    Ok(TaskPair { input, output })
                })
                .collect()
        };
        let train = convert(&raw.train, "train")?;
        let test = convert(&raw.test, "test")?;
        Ok(Task {
            id: id.to_string(),
            train,
            test,
        })
    }

    /// Serialize to the ARC JSON schema. Stable field and row order, so the
    /// output is byte-identical for equal tasks.
    pub fn to_json(&self) -> String {
        let raw = RawTask {
            train: self.train.iter().map(pair_to_raw).collect(),
            test: self.test.iter().map(pair_to_raw).collect(),
        };
        serde_json::to_string(&raw).expect("task serialization cannot fail")
    }

    /// Rotate every grid in the task, tagging the id with the direction.
    pub fn rotate90(&self, direction: Rotation) -> Task {
        let suffix = match direction {
            Rotation::Clockwise => "__rot90cw",
            Rotation::Counterclockwise => "__rot90ccw",
        };
        let rot_pair = |p: &TaskPair| TaskPair {
            input: p.input.rotate90(direction),
            output: p.output.rotate90(direction),
        };
        Task {
            id: format!("{}{}", self.id, suffix),
            train: self.train.iter().map(rot_pair).collect(),
            test: self.test.iter().map(rot_pair).collect(),
        }
    }
}

fn pair_to_raw(p: &TaskPair) -> RawPair {
    RawPair {
        input: p.input.to_rows(),
        output: p.output.to_rows(),
    }
}

/// Load a task from a file; the filename stem becomes the task id.
pub fn load_task_file(path: &Path) -> Result<Task, SchemaError> {
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let bytes = std::fs::read_to_string(path).map_err(|e| SchemaError {
        path: path.display().to_string(),
        kind: SchemaErrorKind::Io(e.to_string()),
    })?;
    Task::from_json(&id, &bytes)
}

/// Mapping from color codes to lowercase color words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Palette {
    words: [String; 10],
}

impl Palette {
    /// Default mapping: 0 black, 1 blue, 2 red, 3 green, 4 yellow, 5 grey,
    /// 6 purple, 7 orange, 8 cyan, 9 brown.
    pub fn canonical() -> Palette {
        let words = [
            "black", "blue", "red", "green", "yellow", "grey", "purple", "orange", "cyan", "brown",
        ]
        .map(String::from);
        Palette { words }
    }

    /// Build from explicit words, checking totality, injectivity, and that no
    /// word contains digits, whitespace, or delimiter characters.
    pub fn new(words: [String; 10]) -> Result<Palette, PaletteError> {
        for (code, w) in words.iter().enumerate() {
            if w.is_empty() || !w.chars().all(|ch| ch.is_ascii_lowercase()) {
                return Err(PaletteError::BadWord {
                    code: code as u8,
                    word: w.clone(),
                });
            }
        }
        for i in 0..10 {
            for j in (i + 1)..10 {
                if words[i] == words[j] {
                    return Err(PaletteError::DuplicateWord(words[i].clone()));
                }
            }
        }
        Ok(Palette { words })
    }

    /// Parse a palette override file: a JSON object `{"0":"black",...}` that
    /// must map all ten codes.
    pub fn from_json(json: &str) -> Result<Palette, PaletteError> {
        let map: HashMap<String, String> =
            serde_json::from_str(json).map_err(|e| PaletteError::Json(e.to_string()))?;
        let mut words: [String; 10] = Default::default();
        for code in 0u8..10 {
            let w = map
                .get(&code.to_string())
                .ok_or(PaletteError::MissingCode(code))?;
            words[code as usize] = w.clone();
        }
        Palette::new(words)
    }

    pub fn word(&self, color: Color) -> &str {
        &self.words[color.code() as usize]
    }

    /// Case-insensitive reverse lookup.
    pub fn color_for_word(&self, word: &str) -> Option<Color> {
        let lower = word.to_ascii_lowercase();
        self.words
            .iter()
            .position(|w| *w == lower)
            .map(|i| Color(i as u8))
    }
}

#[derive(Debug, Error)]
pub enum PaletteError {
    #[error("palette word for code {code} is invalid: {word:?} (must be lowercase letters only)")]
    BadWord { code: u8, word: String },
    #[error("palette word {0:?} appears more than once")]
    DuplicateWord(String),
    #[error("palette file missing code {0}")]
    MissingCode(u8),
    #[error("palette file is not a JSON object of code to word: {0}")]
    Json(String),
}

/// Schema violation found while loading or constructing task data.
#[derive(Debug, Error)]
#[error("{}{kind}", if .path.is_empty() { String::new() } else { format!("{path}: ") })]
pub struct SchemaError {
    pub path: String,
    pub kind: SchemaErrorKind,
}

impl SchemaError {
    fn at(mut self, prefix: String) -> SchemaError {
        if self.path.is_empty() {
            self.path = prefix;
        } else {
            self.path = format!("{prefix}.{}", self.path);
        }
        self
    }
}

#[derive(Debug, Error)]
pub enum SchemaErrorKind {
    #[error("not valid JSON: {0}")]
    Json(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("must not be empty")]
    Empty,
    #[error("ragged rows: expected width {expected}, got {got}")]
    RaggedRows { expected: usize, got: usize },
    #[error("color code {0} outside 0-9")]
    ColorOutOfRange(u8),
    #[error("bad dimensions {height}x{width} (each side must be 1-{MAX_DIM})")]
    BadDimensions { height: usize, width: usize },
    #[error("cell count mismatch: expected {expected}, got {got}")]
    CellCountMismatch { expected: usize, got: usize },
}
