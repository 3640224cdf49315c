//! Batch evaluation: run the full experiment matrix, score answers, and
//! aggregate result tables.
//!
//! The matrix is tasks × encodings × strategies × models. Each cell
//! produces exactly one [`RunRecord`], persisted as one JSON line in
//! `records.jsonl` under the output directory. Cells already present in
//! that file are skipped, so an interrupted run resumes where it left
//! off. Records are written in a fixed cell order regardless of worker
//! scheduling, which keeps replay runs byte-deterministic.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::OpenOptions;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::direct::{DirectEncodingConfig, ParseFailure};
use crate::gateway::{BackendKind, CompletionRequest, Gateway};
use crate::graph::{select_best_fit, OverrideTable};
use crate::object_text::ObjectEncodingConfig;
use crate::prompt::{build_prompt, template_hash, PromptStrategy, TaskEncoder};
use crate::task::{grids_equal, load_task_file, Color, Grid, Palette, Task};

/// An encoding column of the experiment matrix, before per-task
/// abstraction selection.
// The direct variant carries its palette; the size imbalance is harmless
// for a type instantiated once per configured encoding.
#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EncodingSpec {
    Direct(DirectEncodingConfig),
    Object(ObjectEncodingConfig),
}

impl EncodingSpec {
    /// Stable tag, e.g. `word-pipe` or `object-json-edge`.
    pub fn label(&self) -> &'static str {
        match self {
            EncodingSpec::Direct(cfg) => cfg.label(),
            EncodingSpec::Object(cfg) => cfg.label(),
        }
    }

    pub fn from_label(label: &str) -> Option<EncodingSpec> {
        if let Some(cfg) = DirectEncodingConfig::from_label(label, Palette::canonical()) {
            return Some(EncodingSpec::Direct(cfg));
        }
        ObjectEncodingConfig::from_label(label).map(EncodingSpec::Object)
    }

    pub fn is_object(&self) -> bool {
        matches!(self, EncodingSpec::Object(_))
    }

    /// All eight encoding tags, direct variants first.
    pub fn all() -> Vec<EncodingSpec> {
        ALL_ENCODING_LABELS
            .iter()
            .map(|l| EncodingSpec::from_label(l).expect("built-in label"))
            .collect()
    }

    /// Resolve this spec into a concrete encoder for one task. Object
    /// specs select the best-fit abstraction for the task here.
    pub fn encoder_for(&self, task: &Task, overrides: Option<&OverrideTable>) -> TaskEncoder {
        match self {
            EncodingSpec::Direct(cfg) => TaskEncoder::Direct(cfg.clone()),
            EncodingSpec::Object(cfg) => {
                let strategy = select_best_fit(task, Color::BACKGROUND, overrides);
                TaskEncoder::object(*cfg, strategy)
            }
        }
    }
}

pub const ALL_ENCODING_LABELS: [&str; 8] = [
    "number-none",
    "number-pipe",
    "word-comma",
    "word-pipe",
    "object-desc",
    "object-desc-edge",
    "object-json",
    "object-json-edge",
];

/// Full description of one evaluation run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    /// Directory of task JSON files (a `manifest.json`, if present, is
    /// ignored when loading tasks).
    pub dataset_dir: PathBuf,
    pub encodings: Vec<EncodingSpec>,
    pub strategies: Vec<PromptStrategy>,
    pub models: Vec<String>,
    /// Must agree with the gateway handed to [`run_matrix`].
    pub backend: BackendKind,
    /// Where `records.jsonl` lives.
    pub output_dir: PathBuf,
    /// Per-task abstraction overrides for object encodings.
    pub overrides: Option<OverrideTable>,
    /// Worker threads; defaults to the gateway in-flight cap.
    pub workers: usize,
}

impl RunConfig {
    pub fn new(dataset_dir: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> RunConfig {
        RunConfig {
            dataset_dir: dataset_dir.into(),
            encodings: Vec::new(),
            strategies: Vec::new(),
            models: Vec::new(),
            backend: BackendKind::Replay,
            output_dir: output_dir.into(),
            overrides: None,
            workers: 4,
        }
    }

    fn validate(&self, gateway: &Gateway) -> Result<(), HarnessError> {
        if self.encodings.is_empty() {
            return Err(HarnessError::EmptyConfig("encodings"));
        }
        if self.strategies.is_empty() {
            return Err(HarnessError::EmptyConfig("strategies"));
        }
        if self.models.is_empty() {
            return Err(HarnessError::EmptyConfig("models"));
        }
        if self.backend != gateway.backend_kind() {
            return Err(HarnessError::BackendMismatch {
                config: self.backend.as_str(),
                gateway: gateway.backend_kind().as_str(),
            });
        }
        Ok(())
    }
}

/// Outcome of one matrix cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Solved,
    Unsolved,
    ParseFailure,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Solved => "solved",
            Verdict::Unsolved => "unsolved",
            Verdict::ParseFailure => "parse_failure",
        }
    }
}

/// One persisted evaluation of one (task, encoding, strategy, model) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub task_id: String,
    pub encoding: String,
    pub strategy: String,
    pub model: String,
    pub prompt_hash: String,
    pub template_hash: String,
    /// Abstraction tag chosen for object encodings, absent for direct.
    pub abstraction: Option<String>,
    pub raw_completion: String,
    /// Parsed answer grid as rows of color codes, when parsing succeeded.
    pub parsed: Option<Vec<Vec<u8>>>,
    /// Parse failure description, when parsing failed.
    pub parse_error: Option<String>,
    /// Expected output of the first test pair, as rows of color codes.
    pub expected: Vec<Vec<u8>>,
    pub verdict: Verdict,
    pub backend: String,
    pub latency_ms: u64,
    /// Wall-clock creation time in Unix milliseconds; fixed 0 for
    /// replayed completions so replay runs are byte-deterministic.
    pub timestamp_ms: u64,
    /// Gateway failure note; such cells count as unsolved.
    pub error_note: Option<String>,
}

impl RunRecord {
    pub fn key(&self) -> CellKey {
        (
            self.task_id.clone(),
            self.encoding.clone(),
            self.strategy.clone(),
            self.model.clone(),
        )
    }
}

/// Identity of a matrix cell: (task, encoding, strategy, model).
pub type CellKey = (String, String, String, String);

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("run config has an empty {0} list")]
    EmptyConfig(&'static str),
    #[error("config says backend {config} but the gateway is {gateway}")]
    BackendMismatch {
        config: &'static str,
        gateway: &'static str,
    },
    #[error("dataset {path}: {message}")]
    Dataset { path: String, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("records file {path} line {line}: {message}")]
    Records {
        path: String,
        line: usize,
        message: String,
    },
}

/// Load every task file in a dataset directory, sorted by id.
///
/// Reads `*.json` except `manifest.json`; any malformed task aborts the
/// load (datasets are either trusted outputs of the generator or curated
/// by hand, so silent skipping would hide real corruption).
pub fn load_dataset(dir: &Path) -> Result<Vec<Task>, HarnessError> {
    let entries = std::fs::read_dir(dir).map_err(|e| HarnessError::Dataset {
        path: dir.display().to_string(),
        message: e.to_string(),
    })?;
    let mut tasks = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| HarnessError::Dataset {
            path: dir.display().to_string(),
            message: e.to_string(),
        })?;
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        if path.file_name().and_then(|n| n.to_str()) == Some("manifest.json") {
            continue;
        }
        let task = load_task_file(&path).map_err(|e| HarnessError::Dataset {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        tasks.push(task);
    }
    if tasks.is_empty() {
        return Err(HarnessError::Dataset {
            path: dir.display().to_string(),
            message: "no task files found".to_string(),
        });
    }
    tasks.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(tasks)
}

/// Path of the record file inside an output directory.
pub fn records_path(output_dir: &Path) -> PathBuf {
    output_dir.join("records.jsonl")
}

/// Parse a records file produced by [`run_matrix`].
pub fn load_records(path: &Path) -> Result<Vec<RunRecord>, HarnessError> {
    match std::fs::read_to_string(path) {
        Ok(contents) => parse_records(&contents, path).map(|(records, _)| records),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Vec::new()),
        Err(e) => Err(HarnessError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }),
    }
}

/// Parse record lines; returns the records plus the byte length of the
/// newline-terminated prefix. An unterminated final line — the footprint
/// of a killed process — is dropped so its cell is simply re-run.
fn parse_records(contents: &str, path: &Path) -> Result<(Vec<RunRecord>, u64), HarnessError> {
    let mut records = Vec::new();
    let mut valid_len = 0u64;
    for (lineno, line) in contents.split_inclusive('\n').enumerate() {
        if !line.ends_with('\n') {
            break;
        }
        let body = line.trim_end_matches(['\n', '\r']);
        if !body.trim().is_empty() {
            let record =
                serde_json::from_str::<RunRecord>(body).map_err(|e| HarnessError::Records {
                    path: path.display().to_string(),
                    line: lineno + 1,
                    message: e.to_string(),
                })?;
            records.push(record);
        }
        valid_len += line.len() as u64;
    }
    Ok((records, valid_len))
}

/// Decode and judge one completion against a task.
///
/// Only the first test pair's output is elicited by the prompt, so it is
/// the one parsed and compared; a task with additional test pairs can
/// never be marked solved by a single completion and is conservatively
/// scored unsolved even when the first output matches.
pub fn score_completion(
    task: &Task,
    encoder: &TaskEncoder,
    raw: &str,
) -> (Option<Grid>, Option<ParseFailure>, Verdict) {
    let test = &task.test[0];
    let fallback = (test.input.height(), test.input.width());
    match encoder.decode_answer(raw, fallback) {
        Ok(grid) => {
            // One answer is elicited per task, so a task with several test
            // pairs counts as solved only when that answer matches all of
            // its expected outputs.
            let solved = task.test.iter().all(|pair| grids_equal(&grid, &pair.output));
            let verdict = if solved {
                Verdict::Solved
            } else {
                Verdict::Unsolved
            };
            (Some(grid), None, verdict)
        }
        Err(failure) => (None, Some(failure), Verdict::ParseFailure),
    }
}

struct Cell<'a> {
    task: &'a Task,
    encoding: &'a EncodingSpec,
    strategy: PromptStrategy,
    model: &'a str,
}

impl Cell<'_> {
    fn key(&self) -> CellKey {
        (
            self.task.id.clone(),
            self.encoding.label().to_string(),
            self.strategy.label().to_string(),
            self.model.to_string(),
        )
    }
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

fn run_cell(cell: &Cell<'_>, overrides: Option<&OverrideTable>, gateway: &Gateway) -> RunRecord {
    let encoder = cell.encoding.encoder_for(cell.task, overrides);
    let abstraction = match &encoder {
        TaskEncoder::Object { strategy, .. } => Some(strategy.tag().to_string()),
        TaskEncoder::Direct(_) => None,
    };
    let template = template_hash(cell.strategy, encoder.kind());
    let prompt = build_prompt(cell.task, cell.strategy, &encoder);
    let request = CompletionRequest::new(cell.model, prompt);
    let prompt_hash = request.hash();
    let expected = cell.task.test[0].output.to_rows();

    let base = RunRecord {
        task_id: cell.task.id.clone(),
        encoding: cell.encoding.label().to_string(),
        strategy: cell.strategy.label().to_string(),
        model: cell.model.to_string(),
        prompt_hash,
        template_hash: template,
        abstraction,
        raw_completion: String::new(),
        parsed: None,
        parse_error: None,
        expected,
        verdict: Verdict::Unsolved,
        backend: gateway.backend_kind().as_str().to_string(),
        latency_ms: 0,
        timestamp_ms: 0,
        error_note: None,
    };

    match gateway.complete(&request) {
        Ok(result) => {
            let (parsed, parse_error, verdict) = score_completion(cell.task, &encoder, &result.raw_text);
            let timestamp_ms = match result.backend {
                BackendKind::Replay => 0,
                BackendKind::Live => now_ms(),
            };
            RunRecord {
                raw_completion: result.raw_text,
                parsed: parsed.map(|g| g.to_rows()),
                parse_error: parse_error.map(|f| f.to_string()),
                verdict,
                backend: result.backend.as_str().to_string(),
                latency_ms: result.latency_ms,
                timestamp_ms,
                ..base
            }
        }
        // Gateway failures (including replay misses) count as unsolved
        // with a note, and the run continues.
        Err(err) => RunRecord {
            error_note: Some(err.to_string()),
            timestamp_ms: match gateway.backend_kind() {
                BackendKind::Replay => 0,
                BackendKind::Live => now_ms(),
            },
            ..base
        },
    }
}

/// Execute the full matrix, resuming from any persisted records.
///
/// Returns one record per cell in deterministic cell order (tasks sorted
/// by id, then encodings, strategies, and models in config order). All
/// fresh records are appended to `records.jsonl` before returning; cells
/// already on disk are not re-run.
pub fn run_matrix(cfg: &RunConfig, gateway: &Gateway) -> Result<Vec<RunRecord>, HarnessError> {
    cfg.validate(gateway)?;
    let tasks = load_dataset(&cfg.dataset_dir)?;

    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| HarnessError::Io {
        path: cfg.output_dir.display().to_string(),
        message: e.to_string(),
    })?;
    let records_file = records_path(&cfg.output_dir);
    let (existing, valid_len) = match std::fs::read_to_string(&records_file) {
        Ok(contents) => parse_records(&contents, &records_file)?,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => (Vec::new(), 0),
        Err(e) => {
            return Err(HarnessError::Io {
                path: records_file.display().to_string(),
                message: e.to_string(),
            })
        }
    };

    let mut done: HashMap<CellKey, RunRecord> = HashMap::new();
    for record in existing {
        if done.insert(record.key(), record.clone()).is_some() {
            return Err(HarnessError::Records {
                path: records_file.display().to_string(),
                line: 0,
                message: format!(
                    "duplicate record for ({}, {}, {}, {})",
                    record.task_id, record.encoding, record.strategy, record.model
                ),
            });
        }
    }

    // Enumerate cells in their canonical order and keep the pending ones.
    let mut cells = Vec::new();
    for task in &tasks {
        for encoding in &cfg.encodings {
            for &strategy in &cfg.strategies {
                for model in &cfg.models {
                    cells.push(Cell {
                        task,
                        encoding,
                        strategy,
                        model,
                    });
                }
            }
        }
    }
    let pending: Vec<&Cell<'_>> = cells.iter().filter(|c| !done.contains_key(&c.key())).collect();

    if !pending.is_empty() {
        let io_err = |e: std::io::Error| HarnessError::Io {
            path: records_file.display().to_string(),
            message: e.to_string(),
        };
        let mut file = OpenOptions::new()
            .create(true)
            .write(true)
            .truncate(false)
            .open(&records_file)
            .map_err(io_err)?;
        // Drop any torn final line left by an interrupted run before
        // appending fresh records after the well-formed prefix.
        file.set_len(valid_len).map_err(io_err)?;
        use std::io::Seek as _;
        file.seek(std::io::SeekFrom::End(0)).map_err(io_err)?;

        let workers = cfg.workers.max(1).min(pending.len());
        let next = AtomicUsize::new(0);
        let overrides = cfg.overrides.as_ref();
        let (tx, rx) = mpsc::channel::<(usize, RunRecord)>();
        let mut write_error: Option<HarnessError> = None;
        let mut fresh: Vec<(usize, RunRecord)> = Vec::with_capacity(pending.len());

        std::thread::scope(|scope| {
            for _ in 0..workers {
                let tx = tx.clone();
                let next = &next;
                let pending = &pending;
                scope.spawn(move || loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    if i >= pending.len() {
                        break;
                    }
                    let record = run_cell(pending[i], overrides, gateway);
                    if tx.send((i, record)).is_err() {
                        break;
                    }
                });
            }
            drop(tx);

            // Single writer: append in canonical cell order regardless of
            // worker completion order.
            let mut buffer: BTreeMap<usize, RunRecord> = BTreeMap::new();
            let mut next_write = 0usize;
            for (i, record) in rx {
                buffer.insert(i, record);
                while let Some(record) = buffer.remove(&next_write) {
                    if write_error.is_none() {
                        let written = serde_json::to_string(&record)
                            .map_err(|e| HarnessError::Io {
                                path: records_file.display().to_string(),
                                message: e.to_string(),
                            })
                            .and_then(|line| {
                                file.write_all(line.as_bytes())
                                    .and_then(|_| file.write_all(b"\n"))
                                    .map_err(io_err)
                            });
                        if let Err(e) = written {
                            write_error = Some(e);
                        }
                    }
                    fresh.push((next_write, record));
                    next_write += 1;
                }
            }
        });
        if let Some(err) = write_error {
            return Err(err);
        }
        file.flush().map_err(io_err)?;
        for (i, record) in fresh {
            done.insert(pending[i].key(), record);
        }
    }

    Ok(cells
        .iter()
        .map(|c| done.get(&c.key()).expect("every cell resolved").clone())
        .collect())
}

/// Aggregated solved counts: rows are encodings, columns are
/// (strategy, model) pairs, each cell out of `total` tasks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResultTable {
    pub encodings: Vec<String>,
    /// (strategy tag, model name) pairs.
    pub columns: Vec<(String, String)>,
    /// `counts[row][col]` = solved tasks for that encoding and column.
    pub counts: Vec<Vec<usize>>,
    /// Number of tasks behind every cell.
    pub total: usize,
}

impl ResultTable {
    pub fn count(&self, encoding: &str, strategy: &str, model: &str) -> Option<usize> {
        let row = self.encodings.iter().position(|e| e == encoding)?;
        let col = self
            .columns
            .iter()
            .position(|(s, m)| s == strategy && m == model)?;
        Some(self.counts[row][col])
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AggregateError {
    #[error("no records to aggregate")]
    Empty,
    #[error("matrix incomplete; missing cells: {}", format_missing(.0))]
    MissingCells(Vec<CellKey>),
    #[error("duplicate record for cell ({}, {}, {}, {})", .0.0, .0.1, .0.2, .0.3)]
    DuplicateCell(CellKey),
}

fn format_missing(cells: &[CellKey]) -> String {
    let shown: Vec<String> = cells
        .iter()
        .take(5)
        .map(|(t, e, s, m)| format!("({t}, {e}, {s}, {m})"))
        .collect();
    let suffix = if cells.len() > 5 {
        format!(" and {} more", cells.len() - 5)
    } else {
        String::new()
    };
    format!("{}{}", shown.join(", "), suffix)
}

/// Fold records into a [`ResultTable`].
///
/// The matrix shape is inferred from the records themselves: every
/// observed task must have a record for every observed (encoding,
/// strategy, model) combination, else the missing cells are reported.
/// Aggregation is a pure fold over the record list.
pub fn aggregate(records: &[RunRecord]) -> Result<ResultTable, AggregateError> {
    if records.is_empty() {
        return Err(AggregateError::Empty);
    }
    let mut tasks: Vec<String> = Vec::new();
    let mut encodings: Vec<String> = Vec::new();
    let mut columns: Vec<(String, String)> = Vec::new();
    let mut seen: HashSet<CellKey> = HashSet::new();
    for record in records {
        if !seen.insert(record.key()) {
            return Err(AggregateError::DuplicateCell(record.key()));
        }
        if !tasks.contains(&record.task_id) {
            tasks.push(record.task_id.clone());
        }
        if !encodings.contains(&record.encoding) {
            encodings.push(record.encoding.clone());
        }
        let column = (record.strategy.clone(), record.model.clone());
        if !columns.contains(&column) {
            columns.push(column);
        }
    }
    let mut missing = Vec::new();
    for task in &tasks {
        for encoding in &encodings {
            for (strategy, model) in &columns {
                let key = (
                    task.clone(),
                    encoding.clone(),
                    strategy.clone(),
                    model.clone(),
                );
                if !seen.contains(&key) {
                    missing.push(key);
                }
            }
        }
    }
    if !missing.is_empty() {
        return Err(AggregateError::MissingCells(missing));
    }

    let mut counts = vec![vec![0usize; columns.len()]; encodings.len()];
    for record in records {
        if record.verdict == Verdict::Solved {
            let row = encodings.iter().position(|e| *e == record.encoding).unwrap();
            let col = columns
                .iter()
                .position(|(s, m)| *s == record.strategy && *m == record.model)
                .unwrap();
            counts[row][col] += 1;
        }
    }
    Ok(ResultTable {
        encodings,
        columns,
        counts,
        total: tasks.len(),
    })
}

/// Aggregate separately per family, given a task-id → family map
/// (normally derived from the generator manifest).
pub fn aggregate_by_family(
    records: &[RunRecord],
    family_of: &HashMap<String, String>,
) -> Result<BTreeMap<String, ResultTable>, AggregateError> {
    let mut grouped: BTreeMap<String, Vec<RunRecord>> = BTreeMap::new();
    for record in records {
        if let Some(family) = family_of.get(&record.task_id) {
            grouped.entry(family.clone()).or_default().push(record.clone());
        }
    }
    let mut tables = BTreeMap::new();
    for (family, group) in grouped {
        tables.insert(family, aggregate(&group)?);
    }
    Ok(tables)
}

/// Render the object-to-direct solved ratio exactly as the result tables
/// print it: two decimal places truncated toward zero, `∞` when only the
/// object count is nonzero, and `-` when both are zero.
pub fn format_ratio(object: usize, direct: usize) -> String {
    if direct == 0 {
        return if object > 0 { "∞".to_string() } else { "-".to_string() };
    }
    let scaled = object * 100 / direct;
    format!("{}.{:02}×", scaled / 100, scaled % 100)
}

/// Per-column comparison of the strongest object encoding against the
/// strongest direct encoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatioSummary {
    pub columns: Vec<(String, String)>,
    pub direct_best: Vec<usize>,
    pub object_best: Vec<usize>,
    pub ratios: Vec<String>,
}

/// Compute the ratio summary when the table contains at least one direct
/// and one object encoding row; `None` otherwise.
pub fn ratio_summary(table: &ResultTable) -> Option<RatioSummary> {
    let is_object = |label: &str| label.starts_with("object-");
    let direct_rows: Vec<usize> = table
        .encodings
        .iter()
        .enumerate()
        .filter(|(_, e)| !is_object(e))
        .map(|(i, _)| i)
        .collect();
    let object_rows: Vec<usize> = table
        .encodings
        .iter()
        .enumerate()
        .filter(|(_, e)| is_object(e))
        .map(|(i, _)| i)
        .collect();
    if direct_rows.is_empty() || object_rows.is_empty() {
        return None;
    }
    let best = |rows: &[usize], col: usize| rows.iter().map(|&r| table.counts[r][col]).max().unwrap();
    let mut direct_best = Vec::new();
    let mut object_best = Vec::new();
    let mut ratios = Vec::new();
    for col in 0..table.columns.len() {
        let d = best(&direct_rows, col);
        let o = best(&object_rows, col);
        direct_best.push(d);
        object_best.push(o);
        ratios.push(format_ratio(o, d));
    }
    Some(RatioSummary {
        columns: table.columns.clone(),
        direct_best,
        object_best,
        ratios,
    })
}

fn column_heading(strategy: &str, model: &str) -> String {
    format!("{strategy} / {model}")
}

/// Render the aggregate table (and optional per-family breakdown) as
/// Markdown.
pub fn render_markdown(
    table: &ResultTable,
    families: Option<&BTreeMap<String, ResultTable>>,
) -> String {
    let mut out = String::new();
    out.push_str("# Results\n\n");
    out.push_str(&format!(
        "{} tasks; each cell is the number solved out of {}.\n\n",
        table.total, table.total
    ));
    render_count_table(&mut out, table);
    if let Some(summary) = ratio_summary(table) {
        out.push_str("\n## Object vs. direct\n\n");
        out.push_str(
            "Best object-based row against best direct-grid row of each column; \
             the ratio is object ÷ direct.\n\n",
        );
        out.push_str("| |");
        for (s, m) in &summary.columns {
            out.push_str(&format!(" {} |", column_heading(s, m)));
        }
        out.push('\n');
        out.push_str("|---|");
        for _ in &summary.columns {
            out.push_str("---:|");
        }
        out.push('\n');
        out.push_str("| direct (best) |");
        for d in &summary.direct_best {
            out.push_str(&format!(" {d} |"));
        }
        out.push('\n');
        out.push_str("| object (best) |");
        for o in &summary.object_best {
            out.push_str(&format!(" {o} |"));
        }
        out.push('\n');
        out.push_str("| ratio |");
        for r in &summary.ratios {
            out.push_str(&format!(" {r} |"));
        }
        out.push('\n');
    }
    if let Some(families) = families {
        for (family, table) in families {
            out.push_str(&format!("\n## Family: {family}\n\n"));
            render_count_table(&mut out, table);
        }
    }
    out
}

fn render_count_table(out: &mut String, table: &ResultTable) {
    out.push_str("| Encoding |");
    for (s, m) in &table.columns {
        out.push_str(&format!(" {} |", column_heading(s, m)));
    }
    out.push('\n');
    out.push_str("|---|");
    for _ in &table.columns {
        out.push_str("---:|");
    }
    out.push('\n');
    for (row, encoding) in table.encodings.iter().enumerate() {
        out.push_str(&format!("| {encoding} |"));
        for col in 0..table.columns.len() {
            out.push_str(&format!(" {}/{} |", table.counts[row][col], table.total));
        }
        out.push('\n');
    }
}

/// Render the aggregate table as long-form CSV
/// (`encoding,strategy,model,solved,total`).
pub fn render_csv(table: &ResultTable) -> String {
    let mut out = String::from("encoding,strategy,model,solved,total\n");
    for (row, encoding) in table.encodings.iter().enumerate() {
        for (col, (strategy, model)) in table.columns.iter().enumerate() {
            out.push_str(&format!(
                "{encoding},{strategy},{model},{},{}\n",
                table.counts[row][col], table.total
            ));
        }
    }
    out
}
