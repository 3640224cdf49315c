//! Toolkit for probing language models on small grid-reasoning puzzles.
//!
//! The crate covers the full experimental loop:
//!
//! - [`task`] — grids, tasks, palettes, rotations, ARC JSON I/O
//! - [`direct`] — textual grid encodings and the total answer decoder
//! - [`graph`] — object-graph abstraction over grids
//! - [`object_text`] — object-level encodings (descriptor and JSON forms)
//! - [`prompt`] — prompt assembly from templates and encoded tasks
//! - [`gateway`] — model dispatch with a content-addressed replay store
//! - [`datagen`] — seeded procedural generation of benchmark task families
//! - [`harness`] — batch evaluation runs, scoring, and report tables
//! - [`solvability`] — logistic-regression analysis of task features

pub mod datagen;
pub mod direct;
pub mod gateway;
pub mod graph;
pub mod harness;
pub mod object_text;
pub mod prompt;
pub mod solvability;
pub mod task;

pub use direct::{DirectEncodingConfig, ParseFailure};
pub use gateway::{CompletionRequest, CompletionResult, Gateway, ReplayStore};
pub use graph::{AbstractionStrategy, ObjectGraph};
pub use harness::{run_matrix, EncodingSpec, RunConfig, RunRecord, Verdict};
pub use object_text::ObjectEncodingConfig;
pub use prompt::{build_prompt, Prompt, PromptStrategy, TaskEncoder};
pub use solvability::{extract_features, FeatureVector, LogisticModel};
pub use task::{Color, Grid, Palette, Task, TaskPair};

/// Scalar type used by the numeric analysis when no other precision is asked for.
pub type Real = f64;
