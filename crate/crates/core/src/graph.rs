//! Object-graph abstraction: group grid cells into objects, relate them with
//! row/column alignment edges, pick a best-fit grouping per task, and render
//! graphs back into grids.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::task::{Color, Grid, Task};

/// How cells are grouped into objects. The declaration order doubles as the
/// tie-break order for [`select_best_fit`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AbstractionStrategy {
    /// Same-color connected components, 4-adjacency.
    SameColor4,
    /// Same-color connected components, 8-adjacency.
    SameColor8,
    /// Connected components of all non-background cells, 4-adjacency;
    /// node color is the most frequent color, ties to the lowest code.
    MultiColor4,
    /// Maximal same-color runs within each column.
    VerticalRuns,
    /// Maximal same-color runs within each row.
    HorizontalRuns,
    /// One node per non-background cell.
    SinglePixels,
}

impl AbstractionStrategy {
    pub const ALL: [AbstractionStrategy; 6] = [
        AbstractionStrategy::SameColor4,
        AbstractionStrategy::SameColor8,
        AbstractionStrategy::MultiColor4,
        AbstractionStrategy::VerticalRuns,
        AbstractionStrategy::HorizontalRuns,
        AbstractionStrategy::SinglePixels,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            AbstractionStrategy::SameColor4 => "SameColor4",
            AbstractionStrategy::SameColor8 => "SameColor8",
            AbstractionStrategy::MultiColor4 => "MultiColor4",
            AbstractionStrategy::VerticalRuns => "VerticalRuns",
            AbstractionStrategy::HorizontalRuns => "HorizontalRuns",
            AbstractionStrategy::SinglePixels => "SinglePixels",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.tag() == tag)
    }
}

/// Spatial relation between two objects.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    /// The two objects occupy some common row.
    Horizontal,
    /// The two objects occupy some common column.
    Vertical,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Horizontal => "horizontal",
            Relation::Vertical => "vertical",
        }
    }

    pub fn from_str_loose(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "horizontal" => Some(Relation::Horizontal),
            "vertical" => Some(Relation::Vertical),
            _ => None,
        }
    }
}

/// One object: a non-empty set of same-grid pixels with a single color.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObjectNode {
    pub id: usize,
    pub color: Color,
    /// Row-major sorted, pairwise distinct.
    pub pixels: Vec<(usize, usize)>,
}

impl ObjectNode {
    pub fn size(&self) -> usize {
        self.pixels.len()
    }

    /// Topmost-then-leftmost pixel; defines node ordering.
    pub fn anchor(&self) -> (usize, usize) {
        self.pixels[0]
    }
}

/// Undirected edge stored with `a < b`; ordering matches the serialized sort.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjectEdge {
    pub a: usize,
    pub b: usize,
    pub relation: Relation,
}

/// A grid abstracted into objects. `strategy` is `None` for graphs
/// reconstructed from model answers rather than produced by [`abstract_grid`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObjectGraph {
    pub height: usize,
    pub width: usize,
    pub background: Color,
    pub nodes: Vec<ObjectNode>,
    pub edges: Vec<ObjectEdge>,
    pub strategy: Option<AbstractionStrategy>,
}

/// Group a grid's non-background cells into objects under the given strategy.
///
/// Node ids are assigned in scan order of each node's topmost-then-leftmost
/// pixel. An all-background grid yields a graph with zero nodes. Edges are
/// left empty; call [`build_edges`] to populate them.
pub fn abstract_grid(grid: &Grid, strategy: AbstractionStrategy, background: Color) -> ObjectGraph {
    let groups = match strategy {
        AbstractionStrategy::SameColor4 => components(grid, background, false, true),
        AbstractionStrategy::SameColor8 => components(grid, background, true, true),
        AbstractionStrategy::MultiColor4 => components(grid, background, false, false),
        AbstractionStrategy::VerticalRuns => runs(grid, background, Relation::Vertical),
        AbstractionStrategy::HorizontalRuns => runs(grid, background, Relation::Horizontal),
        AbstractionStrategy::SinglePixels => grid_cells(grid)
            .filter(|&(r, c)| grid.get(r, c) != background)
            .map(|p| vec![p])
            .collect(),
    };

    let mut groups: Vec<Vec<(usize, usize)>> = groups
        .into_iter()
        .map(|mut g| {
            g.sort_unstable();
            g
        })
        .collect();
    groups.sort_unstable_by_key(|g| g[0]);

    let nodes = groups
        .into_iter()
        .enumerate()
        .map(|(id, pixels)| {
            let color = match strategy {
                AbstractionStrategy::MultiColor4 => modal_color(grid, &pixels),
                _ => grid.get(pixels[0].0, pixels[0].1),
            };
            ObjectNode { id, color, pixels }
        })
        .collect();

    ObjectGraph {
        height: grid.height(),
        width: grid.width(),
        background,
        nodes,
        edges: Vec::new(),
        strategy: Some(strategy),
    }
}

fn grid_cells(grid: &Grid) -> impl Iterator<Item = (usize, usize)> + '_ {
    let w = grid.width();
    (0..grid.height()).flat_map(move |r| (0..w).map(move |c| (r, c)))
}

/// Connected components via union-find over cell indices.
fn components(
    grid: &Grid,
    background: Color,
    diagonal: bool,
    same_color: bool,
) -> Vec<Vec<(usize, usize)>> {
    let (h, w) = (grid.height(), grid.width());
    let mut uf = UnionFind::new(h * w);
    let idx = |r: usize, c: usize| r * w + c;
    for r in 0..h {
        for c in 0..w {
            let color = grid.get(r, c);
            if color == background {
                continue;
            }
            // Forward neighbors only; union is symmetric.
            let mut neighbors: Vec<(usize, usize)> = Vec::with_capacity(4);
            if c + 1 < w {
                neighbors.push((r, c + 1));
            }
            if r + 1 < h {
                neighbors.push((r + 1, c));
                if diagonal {
                    if c > 0 {
                        neighbors.push((r + 1, c - 1));
                    }
                    if c + 1 < w {
                        neighbors.push((r + 1, c + 1));
                    }
                }
            }
            for (nr, nc) in neighbors {
                let ncolor = grid.get(nr, nc);
                if ncolor == background {
                    continue;
                }
                if same_color && ncolor != color {
                    continue;
                }
                uf.union(idx(r, c), idx(nr, nc));
            }
        }
    }
    let mut by_root: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
    for r in 0..h {
        for c in 0..w {
            if grid.get(r, c) != background {
                by_root.entry(uf.find(idx(r, c))).or_default().push((r, c));
            }
        }
    }
    by_root.into_values().collect()
}

fn runs(grid: &Grid, background: Color, direction: Relation) -> Vec<Vec<(usize, usize)>> {
    let (h, w) = (grid.height(), grid.width());
    let mut groups = Vec::new();
    // A run extends along `direction`, so vertical runs live within a column.
    let (outer, inner) = match direction {
        Relation::Vertical => (w, h),
        Relation::Horizontal => (h, w),
    };
    for o in 0..outer {
        let mut current: Vec<(usize, usize)> = Vec::new();
        for i in 0..inner {
            let (r, c) = match direction {
                Relation::Vertical => (i, o),
                Relation::Horizontal => (o, i),
            };
            let color = grid.get(r, c);
            let continues = color != background
                && current
                    .last()
                    .is_none_or(|&(pr, pc)| grid.get(pr, pc) == color);
            if !continues && !current.is_empty() {
                groups.push(std::mem::take(&mut current));
            }
            if color != background {
                current.push((r, c));
            }
        }
        if !current.is_empty() {
            groups.push(current);
        }
    }
    groups
}

fn modal_color(grid: &Grid, pixels: &[(usize, usize)]) -> Color {
    let mut counts = [0usize; 10];
    for &(r, c) in pixels {
        counts[grid.get(r, c).code() as usize] += 1;
    }
    let best = (0u8..10)
        .max_by_key(|&code| (counts[code as usize], std::cmp::Reverse(code)))
        .unwrap();
    Color::new(best).unwrap()
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Populate edges: for each node pair, horizontal if they occupy a common
/// row, vertical if they occupy a common column (both may hold). Edges are
/// sorted by `(a, b, relation)`.
pub fn build_edges(mut graph: ObjectGraph) -> ObjectGraph {
    let row_sets: Vec<Vec<bool>> = graph
        .nodes
        .iter()
        .map(|n| occupancy(n, graph.height, |p| p.0))
        .collect();
    let col_sets: Vec<Vec<bool>> = graph
        .nodes
        .iter()
        .map(|n| occupancy(n, graph.width, |p| p.1))
        .collect();
    let mut edges = Vec::new();
    for i in 0..graph.nodes.len() {
        for j in (i + 1)..graph.nodes.len() {
            let (a, b) = (graph.nodes[i].id, graph.nodes[j].id);
            if overlap(&row_sets[i], &row_sets[j]) {
                edges.push(ObjectEdge {
                    a: a.min(b),
                    b: a.max(b),
                    relation: Relation::Horizontal,
                });
            }
            if overlap(&col_sets[i], &col_sets[j]) {
                edges.push(ObjectEdge {
                    a: a.min(b),
                    b: a.max(b),
                    relation: Relation::Vertical,
                });
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    graph.edges = edges;
    graph
}

fn occupancy(node: &ObjectNode, len: usize, axis: impl Fn(&(usize, usize)) -> usize) -> Vec<bool> {
    let mut set = vec![false; len];
    for p in &node.pixels {
        let i = axis(p);
        if i < len {
            set[i] = true;
        }
    }
    set
}

fn overlap(a: &[bool], b: &[bool]) -> bool {
    a.iter().zip(b).any(|(&x, &y)| x && y)
}

/// Per-task strategy overrides, keyed by task id.
pub type OverrideTable = HashMap<String, AbstractionStrategy>;

#[derive(Debug, Error)]
#[error("override table is not a JSON object of task id to strategy tag: {0}")]
pub struct OverrideTableError(String);

/// Parse an override file: a JSON object `{"<task_id>": "<StrategyTag>", ...}`.
pub fn load_override_table(json: &str) -> Result<OverrideTable, OverrideTableError> {
    serde_json::from_str(json).map_err(|e| OverrideTableError(e.to_string()))
}

/// Score one strategy on a task's train grids. Higher is better.
///
/// +2 if the node count is identical across all train inputs; +2 if each
/// train pair has equal input and output node counts; +1 if the mean node
/// count per grid lies in [2, 12]; -3 if any grid yields 0 or more than 50
/// nodes.
pub fn score_strategy(task: &Task, strategy: AbstractionStrategy, background: Color) -> i64 {
    let count = |g: &Grid| abstract_grid(g, strategy, background).nodes.len();
    let input_counts: Vec<usize> = task.train.iter().map(|p| count(&p.input)).collect();
    let output_counts: Vec<usize> = task.train.iter().map(|p| count(&p.output)).collect();

    let mut score = 0i64;
    if input_counts.windows(2).all(|w| w[0] == w[1]) {
        score += 2;
    }
    if input_counts
        .iter()
        .zip(&output_counts)
        .all(|(i, o)| i == o)
    {
        score += 2;
    }
    let all: Vec<usize> = input_counts.iter().chain(&output_counts).copied().collect();
    let mean = all.iter().sum::<usize>() as f64 / all.len() as f64;
    if (2.0..=12.0).contains(&mean) {
        score += 1;
    }
    if all.iter().any(|&n| n == 0 || n > 50) {
        score -= 3;
    }
    score
}

/// Choose the abstraction for a task: the override entry if one exists,
/// otherwise the highest-scoring strategy with ties broken by declaration
/// order of [`AbstractionStrategy`].
pub fn select_best_fit(
    task: &Task,
    background: Color,
    overrides: Option<&OverrideTable>,
) -> AbstractionStrategy {
    if let Some(s) = overrides.and_then(|o| o.get(&task.id)) {
        return *s;
    }
    let mut best = AbstractionStrategy::ALL[0];
    let mut best_score = i64::MIN;
    for s in AbstractionStrategy::ALL {
        let score = score_strategy(task, s, background);
        if score > best_score {
            best = s;
            best_score = score;
        }
    }
    best
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RenderError {
    #[error("node {node} has pixel ({row},{col}) outside {height}x{width}")]
    OutOfBounds {
        node: usize,
        row: usize,
        col: usize,
        height: usize,
        width: usize,
    },
    #[error("nodes {a} and {b} overlap at ({row},{col})")]
    Overlap {
        a: usize,
        b: usize,
        row: usize,
        col: usize,
    },
    #[error("graph dimensions {height}x{width} are not a valid grid size")]
    BadDimensions { height: usize, width: usize },
}

/// Paint a graph back into a grid: background everywhere, then each node's
/// pixels in its color.
pub fn render(graph: &ObjectGraph) -> Result<Grid, RenderError> {
    let (h, w) = (graph.height, graph.width);
    if h == 0 || w == 0 || h > crate::task::MAX_DIM || w > crate::task::MAX_DIM {
        return Err(RenderError::BadDimensions {
            height: h,
            width: w,
        });
    }
    let mut cells = vec![graph.background; h * w];
    let mut owner: Vec<Option<usize>> = vec![None; h * w];
    for node in &graph.nodes {
        for &(r, c) in &node.pixels {
            if r >= h || c >= w {
                return Err(RenderError::OutOfBounds {
                    node: node.id,
                    row: r,
                    col: c,
                    height: h,
                    width: w,
                });
            }
            let i = r * w + c;
            if let Some(prev) = owner[i] {
                return Err(RenderError::Overlap {
                    a: prev,
                    b: node.id,
                    row: r,
                    col: c,
                });
            }
            owner[i] = Some(node.id);
            cells[i] = node.color;
        }
    }
    Ok(Grid::new(h, w, cells).expect("dimensions checked above"))
}
