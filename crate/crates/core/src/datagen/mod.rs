//! Seeded procedural generation of benchmark tasks: eighteen one-dimensional
//! families plus three two-dimensional orientation families, each paired with
//! a built-in ground-truth transform used to verify every generated task.
//!
//! Determinism contract: all randomness flows through ChaCha8 seeded from a
//! single 64-bit value, so `(family, seed)` fully determines a task,
//! byte-for-byte in serialized form, on every platform.

mod families;
mod families2d;

use std::path::Path;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::task::{Grid, Rotation, Task, TaskPair};

/// Generation parameters. `width` caps 1D row length (and 2D grid width);
/// families with richer structure need more room than the bare minimum of 6.
#[derive(Clone, Debug)]
pub struct GenParams {
    pub width: usize,
    pub num_objects: usize,
    pub object_size_range: (usize, usize),
    pub seed: u64,
    pub num_train: usize,
    pub tasks_per_type: usize,
}

impl GenParams {
    /// Defaults: width 15, 3 objects, sizes 2–4, 3 train pairs, 50 tasks per
    /// family.
    pub fn new(seed: u64) -> Self {
        GenParams {
            width: 15,
            num_objects: 3,
            object_size_range: (2, 4),
            seed,
            num_train: 3,
            tasks_per_type: 50,
        }
    }

    pub fn validate(&self) -> Result<(), GenerationError> {
        let bad = |reason: String| Err(GenerationError::InvalidParams(reason));
        if self.width < 6 || self.width > crate::task::MAX_DIM {
            return bad(format!("width {} outside 6..=30", self.width));
        }
        if self.num_objects == 0 {
            return bad("num_objects must be at least 1".into());
        }
        let (lo, hi) = self.object_size_range;
        if lo == 0 || lo > hi || hi > self.width {
            return bad(format!("object_size_range ({lo},{hi}) does not fit width"));
        }
        if self.num_train == 0 {
            return bad("num_train must be at least 1".into());
        }
        if self.tasks_per_type == 0 {
            return bad("tasks_per_type must be at least 1".into());
        }
        Ok(())
    }
}

/// The task families. Eighteen are one-dimensional; the last three are the
/// two-dimensional orientation suites whose vertical twins come from task
/// rotation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TaskFamily {
    Move1,
    Move2,
    Move3,
    MoveDynamic,
    Move2Towards,
    Fill,
    PaddedFill,
    Hollow,
    Flip,
    Mirror,
    Denoise,
    DenoiseMulticolor,
    PatternCopy,
    PatternCopyMulticolor,
    RecolorByOddEven,
    RecolorBySize,
    RecolorBySizeComparison,
    Scaling,
    Fill2D,
    Move2D,
    Pile2D,
}

impl TaskFamily {
    pub const ALL: [TaskFamily; 21] = [
        TaskFamily::Move1,
        TaskFamily::Move2,
        TaskFamily::Move3,
        TaskFamily::MoveDynamic,
        TaskFamily::Move2Towards,
        TaskFamily::Fill,
        TaskFamily::PaddedFill,
        TaskFamily::Hollow,
        TaskFamily::Flip,
        TaskFamily::Mirror,
        TaskFamily::Denoise,
        TaskFamily::DenoiseMulticolor,
        TaskFamily::PatternCopy,
        TaskFamily::PatternCopyMulticolor,
        TaskFamily::RecolorByOddEven,
        TaskFamily::RecolorBySize,
        TaskFamily::RecolorBySizeComparison,
        TaskFamily::Scaling,
        TaskFamily::Fill2D,
        TaskFamily::Move2D,
        TaskFamily::Pile2D,
    ];

    pub const ALL_1D: [TaskFamily; 18] = {
        let mut out = [TaskFamily::Move1; 18];
        let mut i = 0;
        while i < 18 {
            out[i] = TaskFamily::ALL[i];
            i += 1;
        }
        out
    };

    pub const ALL_2D: [TaskFamily; 3] = [TaskFamily::Fill2D, TaskFamily::Move2D, TaskFamily::Pile2D];

    pub fn is_2d(self) -> bool {
        matches!(
            self,
            TaskFamily::Fill2D | TaskFamily::Move2D | TaskFamily::Pile2D
        )
    }

    /// Stable name used in ids, file names, manifests, and on the command
    /// line.
    pub fn tag(self) -> &'static str {
        match self {
            TaskFamily::Move1 => "move1",
            TaskFamily::Move2 => "move2",
            TaskFamily::Move3 => "move3",
            TaskFamily::MoveDynamic => "move_dynamic",
            TaskFamily::Move2Towards => "move2_towards",
            TaskFamily::Fill => "fill",
            TaskFamily::PaddedFill => "padded_fill",
            TaskFamily::Hollow => "hollow",
            TaskFamily::Flip => "flip",
            TaskFamily::Mirror => "mirror",
            TaskFamily::Denoise => "denoise",
            TaskFamily::DenoiseMulticolor => "denoise_multicolor",
            TaskFamily::PatternCopy => "pattern_copy",
            TaskFamily::PatternCopyMulticolor => "pattern_copy_multicolor",
            TaskFamily::RecolorByOddEven => "recolor_by_odd_even",
            TaskFamily::RecolorBySize => "recolor_by_size",
            TaskFamily::RecolorBySizeComparison => "recolor_by_size_comparison",
            TaskFamily::Scaling => "scaling",
            TaskFamily::Fill2D => "fill2d",
            TaskFamily::Move2D => "move2d",
            TaskFamily::Pile2D => "pile2d",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.tag() == tag)
    }

    /// Minimum feasible width for this family's structure.
    pub fn min_width(self) -> usize {
        match self {
            TaskFamily::Move1
            | TaskFamily::Move2
            | TaskFamily::Move3
            | TaskFamily::MoveDynamic
            | TaskFamily::Move2Towards => 11,
            TaskFamily::Fill | TaskFamily::Hollow | TaskFamily::Flip => 8,
            TaskFamily::Mirror => 9,
            TaskFamily::Denoise | TaskFamily::DenoiseMulticolor | TaskFamily::Scaling => 10,
            TaskFamily::PaddedFill
            | TaskFamily::PatternCopy
            | TaskFamily::PatternCopyMulticolor
            | TaskFamily::RecolorByOddEven
            | TaskFamily::RecolorBySize
            | TaskFamily::RecolorBySizeComparison => 12,
            TaskFamily::Fill2D | TaskFamily::Move2D | TaskFamily::Pile2D => 8,
        }
    }

    fn ordinal(self) -> u64 {
        Self::ALL.iter().position(|&f| f == self).unwrap() as u64
    }
}

impl std::fmt::Display for TaskFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Parse a family selector: `all`, `1d`, `2d`, or a comma-separated list of
/// family tags.
pub fn parse_families(spec: &str) -> Result<Vec<TaskFamily>, String> {
    match spec.trim() {
        "all" => return Ok(TaskFamily::ALL.to_vec()),
        "1d" => return Ok(TaskFamily::ALL_1D.to_vec()),
        "2d" => return Ok(TaskFamily::ALL_2D.to_vec()),
        _ => {}
    }
    let mut out = Vec::new();
    for part in spec.split(',') {
        let tag = part.trim();
        let family = TaskFamily::from_tag(tag)
            .ok_or_else(|| format!("unknown task family {tag:?}"))?;
        if !out.contains(&family) {
            out.push(family);
        }
    }
    if out.is_empty() {
        return Err("no task families given".into());
    }
    Ok(out)
}

#[derive(Debug, Error)]
pub enum GenerationError {
    #[error("invalid generation params: {0}")]
    InvalidParams(String),
    #[error("params infeasible for {family}: {reason}")]
    Infeasible { family: TaskFamily, reason: String },
    #[error("gave up generating a {family} grid after {attempts} attempts (seed {seed})")]
    Exhausted {
        family: TaskFamily,
        attempts: usize,
        seed: u64,
    },
    #[error("generated task {id} failed its own family check ({family})")]
    SelfCheck { family: TaskFamily, id: String },
    #[error("I/O error at {path}: {message}")]
    Io { path: String, message: String },
}

const MAX_ATTEMPTS: usize = 1000;

/// SplitMix64-style finalizer used to derive per-task seeds.
fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Deterministic per-task seed from a base seed, the family, and the task
/// index within the family.
pub fn task_seed(base: u64, family: TaskFamily, index: u64) -> u64 {
    mix64(mix64(base ^ mix64(family.ordinal())) ^ index)
}

/// Apply a family's ground-truth transform to an input grid. `None` means
/// the grid is not in the family's domain. For 2D families this is the
/// horizontal form; vertical tasks are handled by [`verify_task`] via
/// rotation.
pub fn transform(family: TaskFamily, input: &Grid) -> Option<Grid> {
    if family.is_2d() {
        let out = families2d::transform_grid(family, &input.to_rows())?;
        Grid::from_rows(&out).ok()
    } else {
        if input.height() != 1 {
            return None;
        }
        let row = &input.to_rows()[0];
        let out = families::transform_row(family, row)?;
        Grid::single_row(out).ok()
    }
}

/// True iff the family transform reproduces every output from its input,
/// over train and test pairs alike. Vertical orientation tasks verify via
/// their rotated-back horizontal form.
pub fn verify_task(task: &Task, family: TaskFamily) -> bool {
    let direct = |t: &Task| {
        t.train
            .iter()
            .chain(&t.test)
            .all(|p| transform(family, &p.input).as_ref() == Some(&p.output))
    };
    direct(task) || (family.is_2d() && direct(&task.rotate90(Rotation::Counterclockwise)))
}

/// Generate one task: `num_train` train pairs plus one test pair, all
/// consistent with the family transform. Deterministic in (family, seed).
pub fn generate_task(family: TaskFamily, params: &GenParams) -> Result<Task, GenerationError> {
    params.validate()?;
    if params.width < family.min_width() {
        return Err(GenerationError::Infeasible {
            family,
            reason: format!(
                "width {} below family minimum {}",
                params.width,
                family.min_width()
            ),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut pairs = Vec::with_capacity(params.num_train + 1);
    for _ in 0..params.num_train + 1 {
        pairs.push(gen_pair(family, &mut rng, params)?);
    }
    let test = vec![pairs.pop().unwrap()];
    Ok(Task {
        id: format!("{}_{:016x}", family.tag(), params.seed),
        train: pairs,
        test,
    })
}

fn gen_pair(
    family: TaskFamily,
    rng: &mut ChaCha8Rng,
    params: &GenParams,
) -> Result<TaskPair, GenerationError> {
    for _ in 0..MAX_ATTEMPTS {
        let input = if family.is_2d() {
            families2d::sample_grid(family, rng, params).and_then(|rows| Grid::from_rows(&rows).ok())
        } else {
            families::sample_row(family, rng, params).and_then(|row| Grid::single_row(row).ok())
        };
        let Some(input) = input else { continue };
        if let Some(output) = transform(family, &input) {
            // Degenerate pairs where nothing changes teach nothing; resample.
            if output != input {
                return Ok(TaskPair { input, output });
            }
        }
    }
    Err(GenerationError::Exhausted {
        family,
        attempts: MAX_ATTEMPTS,
        seed: params.seed,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ManifestEntry {
    pub family: String,
    pub id: String,
    pub seed: u64,
    pub file: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Manifest {
    pub base_seed: u64,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub const FILE_NAME: &'static str = "manifest.json";

    pub fn load(dir: &Path) -> Result<Manifest, GenerationError> {
        let path = dir.join(Self::FILE_NAME);
        let text = std::fs::read_to_string(&path).map_err(|e| GenerationError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| GenerationError::Io {
            path: path.display().to_string(),
            message: format!("not a valid manifest: {e}"),
        })
    }
}

/// Generate `tasks_per_type` tasks per family into `out_dir` as ARC JSON
/// files plus a manifest. 2D families write an `_h_` task and its rotated
/// `_v_` twin per index. Every task is verified before it is written.
pub fn generate_dataset(
    families: &[TaskFamily],
    params: &GenParams,
    out_dir: &Path,
) -> Result<Manifest, GenerationError> {
    params.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| GenerationError::Io {
        path: out_dir.display().to_string(),
        message: e.to_string(),
    })?;

    let mut entries = Vec::new();
    let mut write = |task: &Task, family: TaskFamily, seed: u64| -> Result<(), GenerationError> {
        if !verify_task(task, family) {
            return Err(GenerationError::SelfCheck {
                family,
                id: task.id.clone(),
            });
        }
        let file = format!("{}.json", task.id);
        let path = out_dir.join(&file);
        std::fs::write(&path, task.to_json()).map_err(|e| GenerationError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        entries.push(ManifestEntry {
            family: family.tag().to_string(),
            id: task.id.clone(),
            seed,
            file,
        });
        Ok(())
    };

    for &family in families {
        for i in 0..params.tasks_per_type {
            let seed = task_seed(params.seed, family, i as u64);
            let mut task_params = params.clone();
            task_params.seed = seed;
            let mut task = generate_task(family, &task_params)?;
            if family.is_2d() {
                task.id = format!("{}_h_{:03}", family.tag(), i);
                write(&task, family, seed)?;
                let mut v = task.rotate90(Rotation::Clockwise);
                v.id = format!("{}_v_{:03}", family.tag(), i);
                write(&v, family, seed)?;
            } else {
                task.id = format!("{}_{:03}", family.tag(), i);
                write(&task, family, seed)?;
            }
        }
    }

    let manifest = Manifest {
        base_seed: params.seed,
        entries,
    };
    let path = out_dir.join(Manifest::FILE_NAME);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serialization cannot fail");
    std::fs::write(&path, text).map_err(|e| GenerationError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    Ok(manifest)
}
