//! Prompt assembly for grid-reasoning queries.
//!
//! A [`Prompt`] is built from four ordered sections: a fixed instruction
//! block, an optional worked-examples section, the task section (all
//! demonstration pairs plus the test input), and a trailing answer cue.
//! The instruction block and answer cue come from versioned template files
//! bundled with the crate; for a fixed strategy and encoder kind they are
//! byte-identical across tasks, so per-task content only ever appears in
//! the examples and task sections.

use crate::direct::{DirectEncodingConfig, ParseFailure};
use crate::graph::{abstract_grid, build_edges, AbstractionStrategy};
use crate::object_text::{decode_object_answer, encode_object_text, ObjectEncodingConfig};
use crate::task::{Color, Grid, Palette, Task};

use sha2::{Digest, Sha256};

/// How the model is asked to produce its answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PromptStrategy {
    /// Demonstrations only; the model answers with the grid directly.
    FewShot,
    /// Demonstrations preceded by two worked examples with step-by-step
    /// reasoning, inviting the model to reason before answering.
    InContextCoT,
}

impl PromptStrategy {
    pub const ALL: [PromptStrategy; 2] = [PromptStrategy::FewShot, PromptStrategy::InContextCoT];

    /// Short stable label used in run records and CLI flags.
    pub fn label(self) -> &'static str {
        match self {
            PromptStrategy::FewShot => "fewshot",
            PromptStrategy::InContextCoT => "cot",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        match label {
            "fewshot" => Some(PromptStrategy::FewShot),
            "cot" => Some(PromptStrategy::InContextCoT),
            _ => None,
        }
    }
}

impl std::fmt::Display for PromptStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Broad family of grid encoding; selects which template is used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EncoderKind {
    Direct,
    Object,
}

/// A concrete, fully-configured grid encoder.
///
/// Bundles everything needed to turn a [`Grid`] into prompt text and to
/// turn a model reply back into a grid. For object encoders the
/// abstraction strategy must already have been chosen for the task at
/// hand (see [`crate::graph::select_best_fit`]).
#[derive(Clone, Debug)]
pub enum TaskEncoder {
    Direct(DirectEncodingConfig),
    Object {
        cfg: ObjectEncodingConfig,
        strategy: AbstractionStrategy,
        background: Color,
        palette: Palette,
    },
}

impl TaskEncoder {
    /// Object encoder over the canonical palette and black background.
    pub fn object(cfg: ObjectEncodingConfig, strategy: AbstractionStrategy) -> Self {
        TaskEncoder::Object {
            cfg,
            strategy,
            background: Color::BACKGROUND,
            palette: Palette::canonical(),
        }
    }

    pub fn kind(&self) -> EncoderKind {
        match self {
            TaskEncoder::Direct(_) => EncoderKind::Direct,
            TaskEncoder::Object { .. } => EncoderKind::Object,
        }
    }

    /// Stable label of the underlying encoding configuration.
    pub fn label(&self) -> &'static str {
        match self {
            TaskEncoder::Direct(cfg) => cfg.label(),
            TaskEncoder::Object { cfg, .. } => cfg.label(),
        }
    }

    /// Render one grid as prompt text.
    pub fn encode_grid(&self, grid: &Grid) -> String {
        match self {
            TaskEncoder::Direct(cfg) => cfg.encode(grid),
            TaskEncoder::Object {
                cfg,
                strategy,
                background,
                palette,
            } => {
                let mut graph = abstract_grid(grid, *strategy, *background);
                if cfg.include_edges {
                    graph = build_edges(graph);
                }
                encode_object_text(&graph, *cfg, palette)
            }
        }
    }

    /// Extract an answer grid from raw model text.
    ///
    /// Total over arbitrary text; failures are reported as
    /// [`ParseFailure`] values, never panics. `fallback_dims` supplies
    /// grid dimensions for object replies that omit the size header.
    pub fn decode_answer(
        &self,
        raw: &str,
        fallback_dims: (usize, usize),
    ) -> Result<Grid, ParseFailure> {
        match self {
            TaskEncoder::Direct(cfg) => cfg.decode(raw),
            TaskEncoder::Object { cfg, palette, .. } => {
                decode_object_answer(raw, *cfg, palette, fallback_dims)
            }
        }
    }
}

/// A fully assembled prompt, kept as its four ordered sections.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prompt {
    /// Fixed instruction block (identical across tasks for a given
    /// strategy and encoder kind).
    pub instructions: String,
    /// Worked examples; present if and only if the strategy is
    /// [`PromptStrategy::InContextCoT`].
    pub examples: Option<String>,
    /// Demonstration pairs plus the test input.
    pub task: String,
    /// Trailing cue the model is expected to complete.
    pub answer_cue: String,
}

impl Prompt {
    /// The full prompt text: the four sections concatenated in order.
    pub fn text(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.instructions);
        if let Some(examples) = &self.examples {
            out.push_str(examples);
        }
        out.push_str(&self.task);
        out.push_str(&self.answer_cue);
        out
    }

    /// Crude size estimate of the full prompt, in tokens.
    pub fn token_estimate(&self) -> usize {
        estimate_tokens(&self.text())
    }
}

/// Estimate token count as ceil(chars / 3): zero for empty text, and
/// monotone in text length.
pub fn estimate_tokens(text: &str) -> usize {
    let chars = text.chars().count();
    chars.div_ceil(3)
}

const FEWSHOT_DIRECT: &str = include_str!("../templates/fewshot_direct.txt");
const FEWSHOT_OBJECT: &str = include_str!("../templates/fewshot_object.txt");
const COT_DIRECT: &str = include_str!("../templates/cot_direct.txt");
const COT_OBJECT: &str = include_str!("../templates/cot_object.txt");

const EXAMPLE_RECOLOR_JSON: &str = include_str!("../templates/example_recolor.json");
const EXAMPLE_RECOLOR_REASONING: &str = include_str!("../templates/example_recolor_reasoning.txt");
const EXAMPLE_MOVE_JSON: &str = include_str!("../templates/example_move.json");
const EXAMPLE_MOVE_REASONING: &str = include_str!("../templates/example_move_reasoning.txt");

const EXAMPLES_PLACEHOLDER: &str = "{{EXAMPLES}}";
const TASK_PLACEHOLDER: &str = "{{TASK}}";

/// Raw text of the bundled template for a strategy / encoder-kind pair.
pub fn template_text(strategy: PromptStrategy, kind: EncoderKind) -> &'static str {
    match (strategy, kind) {
        (PromptStrategy::FewShot, EncoderKind::Direct) => FEWSHOT_DIRECT,
        (PromptStrategy::FewShot, EncoderKind::Object) => FEWSHOT_OBJECT,
        (PromptStrategy::InContextCoT, EncoderKind::Direct) => COT_DIRECT,
        (PromptStrategy::InContextCoT, EncoderKind::Object) => COT_OBJECT,
    }
}

/// SHA-256 of the template text, hex-encoded; recorded with each run so
/// results can be traced to the exact template revision.
pub fn template_hash(strategy: PromptStrategy, kind: EncoderKind) -> String {
    let digest = Sha256::digest(template_text(strategy, kind).as_bytes());
    hex::encode(digest)
}

/// Template split at its placeholders.
struct TemplateParts {
    /// Text before the first placeholder.
    pre: &'static str,
    /// Text between `{{EXAMPLES}}` and `{{TASK}}` (CoT templates only).
    mid: Option<&'static str>,
    /// Text after `{{TASK}}`.
    post: &'static str,
}

fn template_parts(strategy: PromptStrategy, kind: EncoderKind) -> TemplateParts {
    let text = template_text(strategy, kind);
    match text.split_once(EXAMPLES_PLACEHOLDER) {
        Some((pre, rest)) => {
            let (mid, post) = rest
                .split_once(TASK_PLACEHOLDER)
                .expect("template with {{EXAMPLES}} must also contain {{TASK}}");
            TemplateParts {
                pre,
                mid: Some(mid),
                post,
            }
        }
        None => {
            let (pre, post) = text
                .split_once(TASK_PLACEHOLDER)
                .expect("template must contain {{TASK}}");
            TemplateParts {
                pre,
                mid: None,
                post,
            }
        }
    }
}

/// One bundled worked example: a tiny self-contained task plus a
/// hand-written step-by-step solution.
#[derive(Clone, Debug)]
pub struct InContextExample {
    pub task: Task,
    pub reasoning: &'static str,
}

/// The two bundled worked examples: one recoloring rule and one movement
/// rule, both on 3×3 grids. Their ids never collide with evaluated tasks.
pub fn builtin_examples() -> Vec<InContextExample> {
    let recolor = Task::from_json("incontext_recolor", EXAMPLE_RECOLOR_JSON)
        .expect("bundled recolor example must be a valid task");
    let movement = Task::from_json("incontext_move", EXAMPLE_MOVE_JSON)
        .expect("bundled movement example must be a valid task");
    vec![
        InContextExample {
            task: recolor,
            reasoning: EXAMPLE_RECOLOR_REASONING.trim_end(),
        },
        InContextExample {
            task: movement,
            reasoning: EXAMPLE_MOVE_REASONING.trim_end(),
        },
    ]
}

/// Render the task section: every demonstration pair in original order,
/// then the test input.
fn render_task_section(task: &Task, encoder: &TaskEncoder) -> String {
    let mut out = String::from("Demonstrations:\n");
    for (i, pair) in task.train.iter().enumerate() {
        let n = i + 1;
        out.push_str(&format!("Input Grid {n}: {}\n", encoder.encode_grid(&pair.input)));
        out.push_str(&format!("Output Grid {n}: {}\n", encoder.encode_grid(&pair.output)));
    }
    let test_input = &task.test[0].input;
    out.push_str(&format!("Test Input Grid: {}", encoder.encode_grid(test_input)));
    out
}

/// Render the worked-examples section for chain-of-thought prompts.
fn render_examples_section(encoder: &TaskEncoder) -> String {
    let mut out = String::from("Examples:");
    for (i, example) in builtin_examples().iter().enumerate() {
        let pair = &example.task.train[0];
        let test = &example.task.test[0];
        out.push_str(&format!("\n\nExample {}:\n", i + 1));
        out.push_str(&format!("Input Grid 1: {}\n", encoder.encode_grid(&pair.input)));
        out.push_str(&format!("Output Grid 1: {}\n", encoder.encode_grid(&pair.output)));
        out.push_str(&format!("Test Input Grid: {}\n", encoder.encode_grid(&test.input)));
        out.push_str(&format!("Reasoning: {}\n", example.reasoning));
        out.push_str(&format!("Test Output Grid: {}", encoder.encode_grid(&test.output)));
    }
    out
}

/// Assemble the prompt for one task.
///
/// Deterministic: equal inputs yield byte-identical prompts. The task
/// section contains every demonstration pair exactly once, in order,
/// and ends with the test input; the prompt ends with the
/// `Test Output Grid:` cue.
pub fn build_prompt(task: &Task, strategy: PromptStrategy, encoder: &TaskEncoder) -> Prompt {
    let parts = template_parts(strategy, encoder.kind());
    let task_text = render_task_section(task, encoder);
    match strategy {
        PromptStrategy::FewShot => Prompt {
            instructions: parts.pre.to_string(),
            examples: None,
            task: task_text,
            answer_cue: parts.post.to_string(),
        },
        PromptStrategy::InContextCoT => {
            // Fold the literal text between the two placeholders into the
            // examples section so that `text()` reproduces the substituted
            // template byte-for-byte.
            let mut examples = render_examples_section(encoder);
            examples.push_str(parts.mid.unwrap_or(""));
            Prompt {
                instructions: parts.pre.to_string(),
                examples: Some(examples),
                task: task_text,
                answer_cue: parts.post.to_string(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::AbstractionStrategy;
    use crate::object_text::{ObjectEncodingConfig, ObjectStyle};
    use crate::task::grids_equal;

    fn sample_task(id: &str) -> Task {
        Task::from_json(
            id,
            r#"{
                "train": [
                    {"input": [[1,1,1],[0,0,0],[0,0,0]], "output": [[2,2,2],[0,0,0],[0,0,0]]},
                    {"input": [[0,0,0],[1,1,1],[0,0,0]], "output": [[0,0,0],[2,2,2],[0,0,0]]}
                ],
                "test": [
                    {"input": [[0,0,0],[0,0,0],[1,1,1]], "output": [[0,0,0],[0,0,0],[2,2,2]]}
                ]
            }"#,
        )
        .unwrap()
    }

    fn direct_encoder() -> TaskEncoder {
        TaskEncoder::Direct(DirectEncodingConfig::number_none())
    }

    fn object_encoder(style: ObjectStyle, include_edges: bool) -> TaskEncoder {
        TaskEncoder::object(
            ObjectEncodingConfig {
                style,
                include_edges,
            },
            AbstractionStrategy::SameColor4,
        )
    }

    #[test]
    fn task_section_matches_expected_shape() {
        let task = sample_task("shape");
        let prompt = build_prompt(&task, PromptStrategy::FewShot, &direct_encoder());
        assert!(
            prompt.task.starts_with("Demonstrations:\nInput Grid 1: 111\n000\n000\nOutput Grid 1: 222\n000\n000\n"),
            "task section started: {:?}",
            &prompt.task[..60.min(prompt.task.len())]
        );
        assert!(prompt.task.contains("Input Grid 2: 000\n111\n000\n"));
        assert!(prompt.task.ends_with("Test Input Grid: 000\n000\n111"));
        assert_eq!(prompt.answer_cue, "\nTest Output Grid:");
        assert!(prompt.text().ends_with("Test Output Grid:"));
    }

    #[test]
    fn every_train_pair_appears_exactly_once_in_order() {
        let task = sample_task("pairs");
        let prompt = build_prompt(&task, PromptStrategy::FewShot, &direct_encoder());
        let one = prompt.task.find("Input Grid 1:").unwrap();
        let two = prompt.task.find("Input Grid 2:").unwrap();
        assert!(one < two);
        assert_eq!(prompt.task.matches("Input Grid 1:").count(), 1);
        assert_eq!(prompt.task.matches("Input Grid 2:").count(), 1);
        assert_eq!(prompt.task.matches("Test Input Grid:").count(), 1);
    }

    #[test]
    fn examples_present_iff_cot() {
        let task = sample_task("iff");
        for encoder in [
            direct_encoder(),
            object_encoder(ObjectStyle::Descriptors, false),
            object_encoder(ObjectStyle::Json, true),
        ] {
            let fewshot = build_prompt(&task, PromptStrategy::FewShot, &encoder);
            assert!(fewshot.examples.is_none());
            let cot = build_prompt(&task, PromptStrategy::InContextCoT, &encoder);
            assert!(cot.examples.is_some());
        }
    }

    #[test]
    fn cot_contains_exactly_two_worked_examples() {
        let task = sample_task("count");
        let prompt = build_prompt(&task, PromptStrategy::InContextCoT, &direct_encoder());
        let examples = prompt.examples.as_deref().unwrap();
        assert_eq!(examples.matches("Example 1:").count(), 1);
        assert_eq!(examples.matches("Example 2:").count(), 1);
        assert!(!examples.contains("Example 3:"));
        assert_eq!(examples.matches("Reasoning:").count(), 2);
    }

    #[test]
    fn instructions_constant_across_tasks() {
        let a = sample_task("task_a");
        let b = Task::from_json(
            "task_b",
            r#"{
                "train": [{"input": [[5]], "output": [[6]]}],
                "test": [{"input": [[7]], "output": [[8]]}]
            }"#,
        )
        .unwrap();
        for strategy in PromptStrategy::ALL {
            for encoder in [direct_encoder(), object_encoder(ObjectStyle::Json, false)] {
                let pa = build_prompt(&a, strategy, &encoder);
                let pb = build_prompt(&b, strategy, &encoder);
                assert_eq!(pa.instructions, pb.instructions);
                assert_eq!(pa.answer_cue, pb.answer_cue);
                assert_eq!(pa.examples, pb.examples);
            }
        }
    }

    #[test]
    fn prompt_is_deterministic() {
        let task = sample_task("det");
        let encoder = object_encoder(ObjectStyle::Descriptors, true);
        let p1 = build_prompt(&task, PromptStrategy::InContextCoT, &encoder);
        let p2 = build_prompt(&task, PromptStrategy::InContextCoT, &encoder);
        assert_eq!(p1, p2);
        assert_eq!(p1.text(), p2.text());
    }

    #[test]
    fn text_reassembles_substituted_template() {
        let task = sample_task("subst");
        for strategy in PromptStrategy::ALL {
            for encoder in [direct_encoder(), object_encoder(ObjectStyle::Json, true)] {
                let prompt = build_prompt(&task, strategy, &encoder);
                let template = template_text(strategy, encoder.kind());
                let expected = match strategy {
                    PromptStrategy::FewShot => {
                        template.replace(TASK_PLACEHOLDER, &prompt.task)
                    }
                    PromptStrategy::InContextCoT => template
                        .replace(EXAMPLES_PLACEHOLDER, &render_examples_section(&encoder))
                        .replace(TASK_PLACEHOLDER, &prompt.task),
                };
                assert_eq!(prompt.text(), expected);
            }
        }
    }

    #[test]
    fn worked_examples_are_consistent_mini_tasks() {
        let examples = builtin_examples();
        assert_eq!(examples.len(), 2);
        for example in &examples {
            assert_eq!(example.task.train.len(), 1);
            assert_eq!(example.task.test.len(), 1);
            for pair in example.task.train.iter().chain(example.task.test.iter()) {
                assert_eq!((pair.input.height(), pair.input.width()), (3, 3));
                assert_eq!((pair.output.height(), pair.output.width()), (3, 3));
            }
            assert!(!example.reasoning.is_empty());
        }
        // One recoloring rule (geometry preserved) and one movement rule
        // (colors preserved).
        let recolor = &examples[0].task.train[0];
        assert_eq!(
            recolor
                .input
                .rows()
                .map(|row| row.iter().filter(|c| c.code() != 0).count())
                .collect::<Vec<_>>(),
            recolor
                .output
                .rows()
                .map(|row| row.iter().filter(|c| c.code() != 0).count())
                .collect::<Vec<_>>(),
        );
        let movement = &examples[1].task.train[0];
        assert!(!grids_equal(&movement.input, &movement.output));
        assert_eq!(
            movement.input.color_histogram(),
            movement.output.color_histogram()
        );
    }

    #[test]
    fn example_ids_do_not_collide_with_generated_tasks() {
        // Generated ids are `<family-tag>_<seed:016x>` or dataset-indexed
        // names; the bundled ids use a reserved `incontext_` prefix.
        let examples = builtin_examples();
        for example in &examples {
            assert!(example.task.id.starts_with("incontext_"));
        }
        assert_ne!(examples[0].task.id, examples[1].task.id);
    }

    #[test]
    fn object_prompt_uses_object_format() {
        let task = sample_task("objfmt");
        let prompt = build_prompt(
            &task,
            PromptStrategy::FewShot,
            &object_encoder(ObjectStyle::Descriptors, false),
        );
        assert!(prompt.task.contains("Grid size: 3x3"));
        assert!(prompt.task.contains("Object 0: color="));
        assert!(prompt.instructions.contains("include the grid size"));
    }

    #[test]
    fn decode_answer_round_trips_direct() {
        let task = sample_task("round");
        let encoder = direct_encoder();
        let expected = &task.test[0].output;
        let reply = format!(
            "The rule recolors blue to red.\nTest Output Grid:\n{}\n",
            encoder.encode_grid(expected)
        );
        let decoded = encoder
            .decode_answer(&reply, (expected.height(), expected.width()))
            .unwrap();
        assert!(grids_equal(&decoded, expected));
    }

    #[test]
    fn decode_answer_round_trips_object() {
        let task = sample_task("round_obj");
        for style in [ObjectStyle::Descriptors, ObjectStyle::Json] {
            let encoder = object_encoder(style, false);
            let expected = &task.test[0].output;
            let reply = format!(
                "Reasoning about objects...\nTest Output Grid: {}",
                encoder.encode_grid(expected)
            );
            let decoded = encoder
                .decode_answer(&reply, (expected.height(), expected.width()))
                .unwrap();
            assert!(grids_equal(&decoded, expected));
        }
    }

    #[test]
    fn token_estimate_examples() {
        assert_eq!(estimate_tokens(""), 0);
        assert_eq!(estimate_tokens("abc"), 1);
        assert_eq!(estimate_tokens("abcd"), 2);
        assert_eq!(estimate_tokens(&"x".repeat(300)), 100);
        // Multi-byte characters count as single chars.
        assert_eq!(estimate_tokens("ééé"), 1);
        // Monotone in length.
        let mut prev = 0;
        for n in 0..50 {
            let now = estimate_tokens(&"y".repeat(n));
            assert!(now >= prev);
            prev = now;
        }
    }

    #[test]
    fn prompt_token_estimate_counts_full_text() {
        let task = sample_task("tok");
        let prompt = build_prompt(&task, PromptStrategy::FewShot, &direct_encoder());
        assert_eq!(prompt.token_estimate(), estimate_tokens(&prompt.text()));
        assert!(prompt.token_estimate() > 0);
    }

    #[test]
    fn template_hashes_are_distinct_and_stable() {
        let mut hashes = Vec::new();
        for strategy in PromptStrategy::ALL {
            for kind in [EncoderKind::Direct, EncoderKind::Object] {
                let h = template_hash(strategy, kind);
                assert_eq!(h.len(), 64);
                assert_eq!(h, template_hash(strategy, kind));
                hashes.push(h);
            }
        }
        hashes.sort();
        hashes.dedup();
        assert_eq!(hashes.len(), 4, "all four templates must differ");
    }

    #[test]
    fn strategy_labels_round_trip() {
        for strategy in PromptStrategy::ALL {
            assert_eq!(PromptStrategy::from_label(strategy.label()), Some(strategy));
        }
        assert_eq!(PromptStrategy::from_label("zero-shot"), None);
    }
}
