//! Direct textual grid encodings and the total answer decoder.
//!
//! Four cell-mode/separator combinations are supported: digits with no
//! separator, digits with `|`, color words with `,`, and color words with `|`.
//! Rows are joined by a single newline with no trailing delimiter.
//!
//! Decoding never panics: it scans a raw model response for the last
//! contiguous block of lines that parse as grid rows, skipping markdown
//! fences and label lines, and reports a [`ParseFailure`] value otherwise.

use thiserror::Error;

use crate::task::{Color, Grid, Palette, MAX_DIM};

/// How a single cell is rendered.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellMode {
    /// The digit 0–9.
    Number,
    /// The palette word, lowercase.
    Word,
}

/// Token separator within a row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Separator {
    None,
    Comma,
    Pipe,
}

impl Separator {
    fn as_str(self) -> &'static str {
        match self {
            Separator::None => "",
            Separator::Comma => ",",
            Separator::Pipe => "|",
        }
    }
}

/// A validated cell-mode/separator pair plus the palette used for words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectEncodingConfig {
    mode: CellMode,
    separator: Separator,
    palette: Palette,
}

/// Combination of cell mode and separator that is not representable without
/// ambiguity (words with no separator) or simply not part of the supported
/// set (digits with comma).
#[derive(Debug, Error)]
#[error("unsupported encoding combination: {mode:?} cells with {separator:?} separator")]
pub struct InvalidCombination {
    pub mode: CellMode,
    pub separator: Separator,
}

impl DirectEncodingConfig {
    pub fn new(
        mode: CellMode,
        separator: Separator,
        palette: Palette,
    ) -> Result<Self, InvalidCombination> {
        match (mode, separator) {
            (CellMode::Number, Separator::None)
            | (CellMode::Number, Separator::Pipe)
            | (CellMode::Word, Separator::Comma)
            | (CellMode::Word, Separator::Pipe) => Ok(DirectEncodingConfig {
                mode,
                separator,
                palette,
            }),
            _ => Err(InvalidCombination { mode, separator }),
        }
    }

    pub fn number_none() -> Self {
        Self::new(CellMode::Number, Separator::None, Palette::canonical()).unwrap()
    }

    pub fn number_pipe() -> Self {
        Self::new(CellMode::Number, Separator::Pipe, Palette::canonical()).unwrap()
    }

    pub fn word_comma() -> Self {
        Self::new(CellMode::Word, Separator::Comma, Palette::canonical()).unwrap()
    }

    pub fn word_pipe() -> Self {
        Self::new(CellMode::Word, Separator::Pipe, Palette::canonical()).unwrap()
    }

    /// Stable name used in run records and on the command line.
    pub fn label(&self) -> &'static str {
        match (self.mode, self.separator) {
            (CellMode::Number, Separator::None) => "number-none",
            (CellMode::Number, Separator::Pipe) => "number-pipe",
            (CellMode::Word, Separator::Comma) => "word-comma",
            (CellMode::Word, Separator::Pipe) => "word-pipe",
            _ => unreachable!("constructor rejects other combinations"),
        }
    }

    /// Inverse of [`label`](Self::label), with an explicit palette.
    pub fn from_label(label: &str, palette: Palette) -> Option<Self> {
        let (mode, sep) = match label {
            "number-none" => (CellMode::Number, Separator::None),
            "number-pipe" => (CellMode::Number, Separator::Pipe),
            "word-comma" => (CellMode::Word, Separator::Comma),
            "word-pipe" => (CellMode::Word, Separator::Pipe),
            _ => return None,
        };
        Some(Self::new(mode, sep, palette).unwrap())
    }

    pub fn palette(&self) -> &Palette {
        &self.palette
    }

    /// Render a grid: one line per row, no trailing newline.
    pub fn encode(&self, grid: &Grid) -> String {
        grid.rows()
            .map(|row| self.encode_row(row))
            .collect::<Vec<_>>()
            .join("\n")
    }

    fn encode_row(&self, row: &[Color]) -> String {
        let tokens: Vec<String> = row
            .iter()
            .map(|c| match self.mode {
                CellMode::Number => c.code().to_string(),
                CellMode::Word => self.palette.word(*c).to_string(),
            })
            .collect();
        tokens.join(self.separator.as_str())
    }

    /// Extract the answer grid from a raw model response.
    ///
    /// Lines that are blank, markdown fences, labels (starting with
    /// `Output`, `Test`, or `Grid`, case-insensitive), or that do not parse
    /// as a row act as block separators; the last contiguous block of row
    /// lines is taken as the answer.
    pub fn decode(&self, raw: &str) -> Result<Grid, ParseFailure> {
        let mut blocks: Vec<Vec<Vec<Color>>> = Vec::new();
        let mut current: Vec<Vec<Color>> = Vec::new();
        for line in raw.lines() {
            match self.parse_line(line) {
                Some(row) => current.push(row),
                None => {
                    if !current.is_empty() {
                        blocks.push(std::mem::take(&mut current));
                    }
                }
            }
        }
        if !current.is_empty() {
            blocks.push(current);
        }
        let block = blocks.pop().ok_or(ParseFailure::NoGrid)?;

        let widths: Vec<usize> = block.iter().map(|r| r.len()).collect();
        let width = widths[0];
        if widths.iter().any(|&w| w != width) {
            return Err(ParseFailure::Ragged { widths });
        }
        let height = block.len();
        if height > MAX_DIM || width > MAX_DIM {
            return Err(ParseFailure::TooLarge { height, width });
        }
        let cells: Vec<Color> = block.into_iter().flatten().collect();
        Ok(Grid::new(height, width, cells).expect("dimensions checked above"))
    }

    /// Parse one line as a grid row, or `None` if it is a separator line.
    fn parse_line(&self, line: &str) -> Option<Vec<Color>> {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with("```") || is_label(trimmed) {
            return None;
        }
        match (self.mode, self.separator) {
            (CellMode::Number, Separator::None) => {
                let mut row = Vec::new();
                for ch in trimmed.chars() {
                    if ch.is_whitespace() {
                        continue;
                    }
                    let d = ch.to_digit(10)?;
                    row.push(Color::new(d as u8).ok()?);
                }
                (!row.is_empty()).then_some(row)
            }
            _ => {
                let sep = match self.separator {
                    Separator::Comma => ',',
                    Separator::Pipe => '|',
                    Separator::None => unreachable!(),
                };
                trimmed
                    .split(sep)
                    .map(|tok| self.parse_token(tok.trim()))
                    .collect()
            }
        }
    }

    fn parse_token(&self, token: &str) -> Option<Color> {
        if token.is_empty() {
            return None;
        }
        match self.mode {
            CellMode::Number => token.parse::<u8>().ok().and_then(|n| Color::new(n).ok()),
            CellMode::Word => self.palette.color_for_word(token),
        }
    }
}

fn is_label(trimmed: &str) -> bool {
    let lower = trimmed.to_ascii_lowercase();
    ["output", "test", "grid"]
        .iter()
        .any(|p| lower.starts_with(p))
}

/// Why a response could not be decoded into a grid. A value of this type is
/// the normal outcome for malformed answers; decoding never panics. The
/// object variants are produced by the object-format decoder.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseFailure {
    #[error("no grid found in response")]
    NoGrid,
    #[error("candidate grid has ragged rows (widths {widths:?})")]
    Ragged { widths: Vec<usize> },
    #[error("candidate grid is {height}x{width}, larger than {MAX_DIM}x{MAX_DIM}")]
    TooLarge { height: usize, width: usize },
    #[error("no object block found in response")]
    NoObjectBlock,
    #[error("object block could not be turned into a grid: {0}")]
    BadObjects(String),
}
