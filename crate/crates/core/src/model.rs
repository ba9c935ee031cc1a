//! Abstract model of a hierarchical table: two heading forests and an entry matrix.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which heading axis an item belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Row,
    Col,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::Row => Axis::Col,
            Axis::Col => Axis::Row,
        }
    }

    /// Level name used when the input does not provide one (`level` is 1-based).
    pub fn default_level_name(self, level: usize) -> String {
        match self {
            Axis::Row => format!("row-level-{level}"),
            Axis::Col => format!("col-level-{level}"),
        }
    }

    pub fn default_level_names(self, depth: usize) -> Vec<String> {
        (1..=depth).map(|l| self.default_level_name(l)).collect()
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Row => "row",
            Axis::Col => "col",
        })
    }
}

/// Statistic carried by a derived label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stat {
    Sum,
    Avg,
    Min,
    Max,
}

impl Stat {
    /// Heading text for a derived label; sums use the reserved `&`.
    pub fn symbol(self) -> &'static str {
        match self {
            Stat::Sum => "&",
            Stat::Avg => "avg",
            Stat::Min => "min",
            Stat::Max => "max",
        }
    }

    /// Aggregates the given numbers. `None` when the input is empty.
    pub fn apply(self, values: impl IntoIterator<Item = f64>) -> Option<f64> {
        let mut n = 0usize;
        let mut acc = match self {
            Stat::Sum | Stat::Avg => 0.0,
            Stat::Min => f64::INFINITY,
            Stat::Max => f64::NEG_INFINITY,
        };
        for v in values {
            n += 1;
            acc = match self {
                Stat::Sum | Stat::Avg => acc + v,
                Stat::Min => acc.min(v),
                Stat::Max => acc.max(v),
            };
        }
        match (n, self) {
            (0, _) => None,
            (_, Stat::Avg) => Some(acc / n as f64),
            _ => Some(acc),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "stat")]
pub enum LabelKind {
    Plain,
    Derived(Stat),
}

/// A heading value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Label {
    pub name: String,
    pub kind: LabelKind,
}

impl Label {
    pub fn plain(name: impl Into<String>) -> Self {
        Label {
            name: name.into(),
            kind: LabelKind::Plain,
        }
    }

    pub fn derived(stat: Stat) -> Self {
        Label {
            name: stat.symbol().to_string(),
            kind: LabelKind::Derived(stat),
        }
    }

    pub fn is_derived(&self) -> bool {
        matches!(self.kind, LabelKind::Derived(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, PartialEq)]
pub struct HeadingNode {
    pub id: NodeId,
    pub label: Label,
    pub children: Vec<HeadingNode>,
}

impl HeadingNode {
    /// Ids are assigned when the node becomes part of a [`TableModel`].
    pub fn new(label: Label, children: Vec<HeadingNode>) -> Self {
        HeadingNode {
            id: NodeId(0),
            label,
            children,
        }
    }

    pub fn leaf(label: Label) -> Self {
        Self::new(label, Vec::new())
    }

    pub fn name(&self) -> &str {
        &self.label.name
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn leaf_count(&self) -> usize {
        if self.children.is_empty() {
            1
        } else {
            self.children.iter().map(HeadingNode::leaf_count).sum()
        }
    }

    /// True when `self` and `other` carry the same names (and kinds) all the way down.
    pub fn same_shape(&self, other: &HeadingNode) -> bool {
        self.label == other.label
            && self.children.len() == other.children.len()
            && self
                .children
                .iter()
                .zip(&other.children)
                .all(|(a, b)| a.same_shape(b))
    }
}

/// One full heading structure: an ordered forest whose leaves all sit at `depth`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadingAxis {
    roots: Vec<HeadingNode>,
    depth: usize,
    level_names: Vec<String>,
}

impl HeadingAxis {
    pub fn new(roots: Vec<HeadingNode>, level_names: Vec<String>) -> Result<Self, ModelError> {
        let depth = roots.first().map(first_leaf_depth).unwrap_or(0);
        let axis = HeadingAxis {
            roots,
            depth,
            level_names,
        };
        let mut violations = Vec::new();
        axis_violations(&axis, "axis", &mut violations);
        if violations.is_empty() {
            Ok(axis)
        } else {
            Err(ModelError::Invalid(violations))
        }
    }

    /// Builds an axis using the default level names for `kind`.
    pub fn with_default_names(roots: Vec<HeadingNode>, kind: Axis) -> Result<Self, ModelError> {
        let depth = roots.first().map(first_leaf_depth).unwrap_or(0);
        Self::new(roots, kind.default_level_names(depth))
    }

    /// No invariant checks; pair with [`validate_model`].
    pub fn from_parts_unchecked(
        roots: Vec<HeadingNode>,
        depth: usize,
        level_names: Vec<String>,
    ) -> Self {
        HeadingAxis {
            roots,
            depth,
            level_names,
        }
    }

    pub fn roots(&self) -> &[HeadingNode] {
        &self.roots
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn level_names(&self) -> &[String] {
        &self.level_names
    }

    /// Name of a 1-based level.
    pub fn level_name(&self, level: usize) -> &str {
        &self.level_names[level - 1]
    }

    pub fn leaf_count(&self) -> usize {
        self.roots.iter().map(HeadingNode::leaf_count).sum()
    }

    pub fn into_parts(self) -> (Vec<HeadingNode>, usize, Vec<String>) {
        (self.roots, self.depth, self.level_names)
    }

    /// Calls `f` with the root-to-leaf node path of every leaf, in presentation order.
    pub fn for_each_leaf_path<'a>(&'a self, mut f: impl FnMut(&[&'a HeadingNode])) {
        fn walk<'a>(
            node: &'a HeadingNode,
            path: &mut Vec<&'a HeadingNode>,
            f: &mut dyn FnMut(&[&'a HeadingNode]),
        ) {
            path.push(node);
            if node.children.is_empty() {
                f(path);
            } else {
                for c in &node.children {
                    walk(c, path, f);
                }
            }
            path.pop();
        }
        let mut path = Vec::with_capacity(self.depth);
        for r in &self.roots {
            walk(r, &mut path, &mut f);
        }
    }

    /// All nodes at a 1-based level, in presentation order.
    pub fn nodes_at_level(&self, level: usize) -> Vec<&HeadingNode> {
        let mut out = Vec::new();
        fn walk<'a>(n: &'a HeadingNode, cur: usize, want: usize, out: &mut Vec<&'a HeadingNode>) {
            if cur == want {
                out.push(n);
            } else {
                for c in &n.children {
                    walk(c, cur + 1, want, out);
                }
            }
        }
        for r in &self.roots {
            walk(r, 1, level, &mut out);
        }
        out
    }

    fn assign_ids(&mut self, next: &mut u32) {
        fn walk(n: &mut HeadingNode, next: &mut u32) {
            n.id = NodeId(*next);
            *next += 1;
            for c in &mut n.children {
                walk(c, next);
            }
        }
        for r in &mut self.roots {
            walk(r, next);
        }
    }
}

fn first_leaf_depth(node: &HeadingNode) -> usize {
    1 + node.children.first().map(first_leaf_depth).unwrap_or(0)
}

/// A table entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Number(f64),
    Text(String),
    Missing,
}

impl Value {
    /// Non-finite inputs become `Missing`.
    pub fn number(x: f64) -> Value {
        if x.is_finite() {
            Value::Number(x)
        } else {
            Value::Missing
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Number(x) => Some(*x),
            _ => None,
        }
    }

    pub fn is_text(&self) -> bool {
        matches!(self, Value::Text(_))
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::number(x)
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T> Matrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Option<Self> {
        (rows * cols == data.len()).then_some(Matrix { rows, cols, data })
    }

    /// Fails when the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Option<Self> {
        let n = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return None;
        }
        let data: Vec<T> = rows.into_iter().flatten().collect();
        Some(Matrix {
            rows: n,
            cols,
            data,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[T]> {
        (0..self.rows).map(move |r| self.row(r))
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }
}

impl<T: Clone> Matrix<T> {
    pub fn transposed(&self) -> Matrix<T> {
        Matrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }
}

/// Heading forests for both axes plus the entry matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TableModel {
    row_axis: HeadingAxis,
    col_axis: HeadingAxis,
    entries: Matrix<Value>,
    version: u64,
}

impl TableModel {
    /// Validates every invariant and assigns canonical node ids. Starts at version 1.
    pub fn new(
        row_axis: HeadingAxis,
        col_axis: HeadingAxis,
        entries: Matrix<Value>,
    ) -> Result<Self, ModelError> {
        let mut model = TableModel {
            row_axis,
            col_axis,
            entries,
            version: 1,
        };
        let mut next = 0;
        model.row_axis.assign_ids(&mut next);
        model.col_axis.assign_ids(&mut next);
        let violations = validate_model(&model);
        if violations.is_empty() {
            Ok(model)
        } else {
            Err(ModelError::Invalid(violations))
        }
    }

    /// No invariant checks and ids are kept as given.
    pub fn from_parts_unchecked(
        row_axis: HeadingAxis,
        col_axis: HeadingAxis,
        entries: Matrix<Value>,
        version: u64,
    ) -> Self {
        TableModel {
            row_axis,
            col_axis,
            entries,
            version,
        }
    }

    pub fn with_version(mut self, version: u64) -> Self {
        self.version = version;
        self
    }

    pub fn row_axis(&self) -> &HeadingAxis {
        &self.row_axis
    }

    pub fn col_axis(&self) -> &HeadingAxis {
        &self.col_axis
    }

    pub fn axis(&self, axis: Axis) -> &HeadingAxis {
        match axis {
            Axis::Row => &self.row_axis,
            Axis::Col => &self.col_axis,
        }
    }

    pub fn entries(&self) -> &Matrix<Value> {
        &self.entries
    }

    pub fn entry(&self, row: usize, col: usize) -> &Value {
        self.entries.get(row, col)
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    /// (row leaves, column leaves)
    pub fn shape(&self) -> (usize, usize) {
        (self.entries.rows(), self.entries.cols())
    }

    pub fn cell_count(&self) -> usize {
        self.entries.rows() * self.entries.cols()
    }

    /// Structural equality ignoring the version counter.
    pub fn same_content(&self, other: &TableModel) -> bool {
        self.row_axis == other.row_axis
            && self.col_axis == other.col_axis
            && self.entries == other.entries
    }

    pub fn into_parts(self) -> (HeadingAxis, HeadingAxis, Matrix<Value>) {
        (self.row_axis, self.col_axis, self.entries)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    EmptyAxis,
    RaggedDepth,
    LevelNames,
    EmptyLabel,
    DuplicateSibling,
    IdCollision,
    ShapeMismatch,
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid table model: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

impl ModelError {
    pub fn violations(&self) -> &[Violation] {
        match self {
            ModelError::Invalid(v) => v,
        }
    }
}

fn violation(kind: ViolationKind, message: String) -> Violation {
    Violation { kind, message }
}

fn axis_violations(axis: &HeadingAxis, which: &str, out: &mut Vec<Violation>) {
    if axis.roots.is_empty() {
        out.push(violation(
            ViolationKind::EmptyAxis,
            format!("{which} headings have no leaves"),
        ));
        return;
    }
    if axis.level_names.len() != axis.depth {
        out.push(violation(
            ViolationKind::LevelNames,
            format!(
                "{which} headings have {} level names for depth {}",
                axis.level_names.len(),
                axis.depth
            ),
        ));
    }
    fn walk(
        siblings: &[HeadingNode],
        level: usize,
        depth: usize,
        which: &str,
        out: &mut Vec<Violation>,
    ) {
        let mut seen = HashSet::new();
        for n in siblings {
            if n.label.name.is_empty() {
                out.push(violation(
                    ViolationKind::EmptyLabel,
                    format!("{which} heading at level {level} has an empty label"),
                ));
            }
            if !seen.insert(n.label.name.as_str()) {
                out.push(violation(
                    ViolationKind::DuplicateSibling,
                    format!(
                        "{which} heading {:?} appears twice under one parent",
                        n.label.name
                    ),
                ));
            }
            if n.children.is_empty() {
                if level != depth {
                    out.push(violation(
                        ViolationKind::RaggedDepth,
                        format!(
                            "{which} heading {:?} is a leaf at level {level}, expected {depth}",
                            n.label.name
                        ),
                    ));
                }
            } else {
                walk(&n.children, level + 1, depth, which, out);
            }
        }
    }
    walk(&axis.roots, 1, axis.depth, which, out);
}

/// Checks every model invariant; an empty result means the model is valid.
pub fn validate_model(model: &TableModel) -> Vec<Violation> {
    let mut out = Vec::new();
    axis_violations(&model.row_axis, "row", &mut out);
    axis_violations(&model.col_axis, "column", &mut out);

    let mut ids = HashSet::new();
    let mut collisions = 0usize;
    let mut stack: Vec<&HeadingNode> = model
        .row_axis
        .roots
        .iter()
        .chain(&model.col_axis.roots)
        .collect();
    while let Some(n) = stack.pop() {
        if !ids.insert(n.id) {
            collisions += 1;
        }
        stack.extend(&n.children);
    }
    if collisions > 0 {
        out.push(violation(
            ViolationKind::IdCollision,
            format!("id collision: {collisions} heading node id(s) reused"),
        ));
    }

    let rows = model.row_axis.leaf_count();
    let cols = model.col_axis.leaf_count();
    if model.entries.rows() != rows || model.entries.cols() != cols {
        out.push(violation(
            ViolationKind::ShapeMismatch,
            format!(
                "shape mismatch: entries are {}x{} but headings have {}x{} leaves",
                model.entries.rows(),
                model.entries.cols(),
                rows,
                cols
            ),
        ));
    }
    if model
        .entries
        .iter()
        .any(|v| matches!(v, Value::Number(x) if !x.is_finite()))
    {
        out.push(violation(
            ViolationKind::NonFinite,
            "entries contain a non-finite number".to_string(),
        ));
    }
    out
}
