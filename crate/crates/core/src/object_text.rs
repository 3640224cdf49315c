//! Textual object representations: render an [`ObjectGraph`] as a list of
//! object descriptors or as JSON (optionally with edges), and decode
//! object-formatted model answers back into grids.

use serde::Serialize;
use serde_json::Value;

use crate::direct::ParseFailure;
use crate::graph::{render, ObjectGraph, ObjectNode, RenderError};
use crate::task::{Grid, Palette};

/// Which textual object form to emit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObjectStyle {
    /// One `Object <id>: ...` line per node.
    Descriptors,
    /// A single JSON object with `grid_size` and `objects` fields.
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ObjectEncodingConfig {
    pub style: ObjectStyle,
    pub include_edges: bool,
}

impl ObjectEncodingConfig {
    /// Stable name used in run records and on the command line.
    pub fn label(self) -> &'static str {
        match (self.style, self.include_edges) {
            (ObjectStyle::Descriptors, false) => "object-desc",
            (ObjectStyle::Descriptors, true) => "object-desc-edge",
            (ObjectStyle::Json, false) => "object-json",
            (ObjectStyle::Json, true) => "object-json-edge",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        let (style, include_edges) = match label {
            "object-desc" => (ObjectStyle::Descriptors, false),
            "object-desc-edge" => (ObjectStyle::Descriptors, true),
            "object-json" => (ObjectStyle::Json, false),
            "object-json-edge" => (ObjectStyle::Json, true),
            _ => return None,
        };
        Some(ObjectEncodingConfig {
            style,
            include_edges,
        })
    }
}

#[derive(Serialize)]
struct JsonObject {
    id: usize,
    color: String,
    size: usize,
    coordinates: Vec<[usize; 2]>,
}

#[derive(Serialize)]
struct JsonGraph {
    grid_size: [usize; 2],
    objects: Vec<JsonObject>,
    #[serde(skip_serializing_if = "Option::is_none")]
    edges: Option<Vec<(usize, usize, &'static str)>>,
}

/// Serialize a graph. Identical graphs produce byte-identical text.
pub fn encode_object_text(graph: &ObjectGraph, cfg: ObjectEncodingConfig, palette: &Palette) -> String {
    match cfg.style {
        ObjectStyle::Descriptors => {
            let mut lines = vec![format!("Grid size: {}x{}", graph.height, graph.width)];
            for node in &graph.nodes {
                let coords: Vec<String> = node
                    .pixels
                    .iter()
                    .map(|(r, c)| format!("({r},{c})"))
                    .collect();
                lines.push(format!(
                    "Object {}: color={}, size={}, coordinates=[{}]",
                    node.id,
                    palette.word(node.color),
                    node.size(),
                    coords.join(",")
                ));
            }
            if cfg.include_edges {
                let entries: Vec<String> = graph
                    .edges
                    .iter()
                    .map(|e| format!("({},{},{})", e.a, e.b, e.relation.as_str()))
                    .collect();
                lines.push(format!("Edges: {}", entries.join(" ")).trim_end().to_string());
            }
            lines.join("\n")
        }
        ObjectStyle::Json => {
            let doc = JsonGraph {
                grid_size: [graph.height, graph.width],
                objects: graph
                    .nodes
                    .iter()
                    .map(|n| JsonObject {
                        id: n.id,
                        color: palette.word(n.color).to_string(),
                        size: n.size(),
                        coordinates: n.pixels.iter().map(|&(r, c)| [r, c]).collect(),
                    })
                    .collect(),
                edges: cfg.include_edges.then(|| {
                    graph
                        .edges
                        .iter()
                        .map(|e| (e.a, e.b, e.relation.as_str()))
                        .collect()
                }),
            };
            serde_json::to_string(&doc).expect("object graph serialization cannot fail")
        }
    }
}

/// Extract the answer grid from an object-formatted model response.
///
/// Finds the last well-formed object block of the configured style — for
/// JSON, the last balanced JSON object containing an `"objects"` key; for
/// descriptors, the last run of `Object <k>:` lines with an optional
/// `Grid size` header — then reconstructs a graph and renders it. Grid
/// dimensions come from the block when present, else `fallback_dims`.
pub fn decode_object_answer(
    text: &str,
    cfg: ObjectEncodingConfig,
    palette: &Palette,
    fallback_dims: (usize, usize),
) -> Result<Grid, ParseFailure> {
    let graph = match cfg.style {
        ObjectStyle::Json => decode_json_block(text, palette, fallback_dims)?,
        ObjectStyle::Descriptors => decode_descriptor_block(text, palette, fallback_dims)?,
    };
    render(&graph).map_err(|e: RenderError| ParseFailure::BadObjects(e.to_string()))
}

/// All balanced `{...}` regions, quote- and escape-aware, sorted by start.
fn balanced_objects(text: &str) -> Vec<(usize, &str)> {
    let bytes = text.as_bytes();
    let mut stack = Vec::new();
    let mut spans = Vec::new();
    let mut in_string = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate() {
        if in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' => stack.push(i),
            b'}' => {
                if let Some(start) = stack.pop() {
                    spans.push((start, i + 1));
                }
            }
            _ => {}
        }
    }
    spans.sort_unstable();
    spans
        .into_iter()
        .map(|(s, e)| (s, &text[s..e]))
        .collect()
}

fn decode_json_block(
    text: &str,
    palette: &Palette,
    fallback_dims: (usize, usize),
) -> Result<ObjectGraph, ParseFailure> {
    let block = balanced_objects(text)
        .into_iter()
        .filter_map(|(start, s)| {
            let v: Value = serde_json::from_str(s).ok()?;
            v.as_object()?.contains_key("objects").then_some((start, v))
        })
        .next_back()
        .map(|(_, v)| v)
        .ok_or(ParseFailure::NoObjectBlock)?;

    let bad = |msg: String| ParseFailure::BadObjects(msg);
    let (height, width) = match block.get("grid_size") {
        Some(v) => {
            let dims = v
                .as_array()
                .filter(|a| a.len() == 2)
                .and_then(|a| Some((a[0].as_u64()?, a[1].as_u64()?)))
                .ok_or_else(|| bad(format!("grid_size is not a [height,width] pair: {v}")))?;
            (dims.0 as usize, dims.1 as usize)
        }
        None => fallback_dims,
    };
    let objects = block
        .get("objects")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("objects is not an array".into()))?;

    let mut nodes = Vec::new();
    for (i, obj) in objects.iter().enumerate() {
        let id = obj.get("id").and_then(Value::as_u64).map(|v| v as usize).unwrap_or(i);
        let word = obj
            .get("color")
            .and_then(Value::as_str)
            .ok_or_else(|| bad(format!("object {i} has no color word")))?;
        let color = palette
            .color_for_word(word)
            .ok_or_else(|| bad(format!("unknown color word {word:?}")))?;
        let coords = obj
            .get("coordinates")
            .and_then(Value::as_array)
            .ok_or_else(|| bad(format!("object {i} has no coordinates array")))?;
        let mut pixels = Vec::with_capacity(coords.len());
        for coord in coords {
            let pair = coord
                .as_array()
                .filter(|a| a.len() == 2)
                .and_then(|a| Some((a[0].as_u64()?, a[1].as_u64()?)))
                .ok_or_else(|| bad(format!("coordinate {coord} is not a [row,col] pair")))?;
            pixels.push((pair.0 as usize, pair.1 as usize));
        }
        if pixels.is_empty() {
            continue; // an empty object paints nothing
        }
        pixels.sort_unstable();
        pixels.dedup();
        nodes.push(ObjectNode { id, color, pixels });
    }

    Ok(ObjectGraph {
        height,
        width,
        background: crate::task::Color::BACKGROUND,
        nodes,
        edges: Vec::new(),
        strategy: None,
    })
}

fn decode_descriptor_block(
    text: &str,
    palette: &Palette,
    fallback_dims: (usize, usize),
) -> Result<ObjectGraph, ParseFailure> {
    let lines: Vec<&str> = text.lines().collect();
    // Find the last maximal run of object lines.
    let mut last_run: Option<(usize, usize)> = None;
    let mut run_start: Option<usize> = None;
    for (i, line) in lines.iter().enumerate() {
        if is_object_line(line) {
            run_start.get_or_insert(i);
        } else if let Some(s) = run_start.take() {
            last_run = Some((s, i));
        }
    }
    if let Some(s) = run_start {
        last_run = Some((s, lines.len()));
    }
    // A grid with no foreground pixels serializes as a bare header with zero
    // object lines; accept that shape (last header wins) as an empty graph.
    let Some((start, end)) = last_run else {
        let dims = lines
            .iter()
            .rev()
            .find_map(|l| parse_grid_size(l))
            .ok_or(ParseFailure::NoObjectBlock)?;
        return Ok(ObjectGraph {
            height: dims.0,
            width: dims.1,
            background: crate::task::Color::BACKGROUND,
            nodes: Vec::new(),
            edges: Vec::new(),
            strategy: None,
        });
    };

    // Optional header on the nearest non-blank line above the run.
    let dims = lines[..start]
        .iter()
        .rev()
        .find(|l| !l.trim().is_empty())
        .and_then(|l| parse_grid_size(l))
        .unwrap_or(fallback_dims);

    let mut nodes = Vec::new();
    for line in &lines[start..end] {
        if let Some(node) = parse_object_line(line, palette)? {
            nodes.push(node);
        }
    }

    Ok(ObjectGraph {
        height: dims.0,
        width: dims.1,
        background: crate::task::Color::BACKGROUND,
        nodes,
        edges: Vec::new(),
        strategy: None,
    })
}

/// `Object <digits>:` prefix, case-insensitive, whitespace tolerated.
fn is_object_line(line: &str) -> bool {
    let t = line.trim();
    let lower = t.to_ascii_lowercase();
    let Some(rest) = lower.strip_prefix("object") else {
        return false;
    };
    let rest = rest.trim_start();
    let digits: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
    !digits.is_empty() && rest[digits.len()..].trim_start().starts_with(':')
}

/// `Grid size: HxW` (case-insensitive).
fn parse_grid_size(line: &str) -> Option<(usize, usize)> {
    let t = line.trim().to_ascii_lowercase();
    let rest = t.strip_prefix("grid size")?.trim_start().strip_prefix(':')?;
    let (h, w) = rest.trim().split_once('x')?;
    Some((h.trim().parse().ok()?, w.trim().parse().ok()?))
}

fn parse_object_line(line: &str, palette: &Palette) -> Result<Option<ObjectNode>, ParseFailure> {
    let bad = |msg: String| ParseFailure::BadObjects(msg);
    let t = line.trim();
    let lower = t.to_ascii_lowercase();
    let after = lower.strip_prefix("object").unwrap_or("").trim_start();
    let id: usize = after
        .chars()
        .take_while(|c| c.is_ascii_digit())
        .collect::<String>()
        .parse()
        .map_err(|_| bad(format!("object line has no id: {t:?}")))?;

    let color_at = lower
        .find("color=")
        .ok_or_else(|| bad(format!("object {id} line has no color field")))?;
    let word: String = lower[color_at + "color=".len()..]
        .chars()
        .take_while(|&c| c != ',' && !c.is_whitespace())
        .collect();
    let color = palette
        .color_for_word(&word)
        .ok_or_else(|| bad(format!("unknown color word {word:?}")))?;

    let coords_at = lower
        .find("coordinates=[")
        .ok_or_else(|| bad(format!("object {id} line has no coordinates field")))?;
    let coords_start = coords_at + "coordinates=[".len();
    let coords_end = lower[coords_start..]
        .find(']')
        .map(|i| coords_start + i)
        .ok_or_else(|| bad(format!("object {id} coordinates are not closed")))?;
    let body = &lower[coords_start..coords_end];

    let mut pixels = Vec::new();
    for chunk in body.split(')') {
        let chunk = chunk.trim().trim_start_matches(',').trim();
        if chunk.is_empty() {
            continue;
        }
        let inner = chunk
            .strip_prefix('(')
            .ok_or_else(|| bad(format!("malformed coordinate {chunk:?} in object {id}")))?;
        let (r, c) = inner
            .split_once(',')
            .ok_or_else(|| bad(format!("malformed coordinate {chunk:?} in object {id}")))?;
        let row = r.trim().parse::<usize>();
        let col = c.trim().parse::<usize>();
        match (row, col) {
            (Ok(row), Ok(col)) => pixels.push((row, col)),
            _ => return Err(bad(format!("malformed coordinate {chunk:?} in object {id}"))),
        }
    }
    if pixels.is_empty() {
        return Ok(None);
    }
    pixels.sort_unstable();
    pixels.dedup();
    Ok(Some(ObjectNode { id, color, pixels }))
}
