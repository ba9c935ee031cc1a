//! Label-path addressing of cells and blocks.
//!
//! A [`LabelSequence`] names a bottom-level label by its root-to-leaf path,
//! optionally ending in `*` to cover a whole subtree. A [`Locator`] is a list of
//! such sequences on one axis; a row locator plus a column locator pick out a
//! rectangular [`Block`].

use std::collections::HashMap;
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Axis, HeadingAxis, HeadingNode, NodeId, TableModel};

pub const WILDCARD: &str = "*";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct LabelSequence {
    labels: Vec<String>,
    wildcard_tail: bool,
}

impl LabelSequence {
    pub fn new(labels: Vec<String>, wildcard_tail: bool) -> Result<Self, LocatorError> {
        if labels.is_empty() {
            return Err(LocatorError::InvalidSequence(
                "a label sequence needs at least one label".into(),
            ));
        }
        if labels.iter().any(|l| l == WILDCARD) {
            return Err(LocatorError::InvalidSequence(
                "a wildcard may only appear as the last element".into(),
            ));
        }
        Ok(LabelSequence {
            labels,
            wildcard_tail,
        })
    }

    /// Parses path elements where a final `"*"` marks a wildcard tail.
    pub fn parse<S: AsRef<str>>(parts: &[S]) -> Result<Self, LocatorError> {
        let mut labels: Vec<String> = parts.iter().map(|s| s.as_ref().to_string()).collect();
        let wildcard = labels.last().is_some_and(|l| l == WILDCARD);
        if wildcard {
            labels.pop();
        }
        Self::new(labels, wildcard)
    }

    /// The labels without the wildcard marker.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn wildcard_tail(&self) -> bool {
        self.wildcard_tail
    }
}

impl TryFrom<Vec<String>> for LabelSequence {
    type Error = LocatorError;

    fn try_from(parts: Vec<String>) -> Result<Self, Self::Error> {
        Self::parse(&parts)
    }
}

impl From<LabelSequence> for Vec<String> {
    fn from(seq: LabelSequence) -> Self {
        let mut v = seq.labels;
        if seq.wildcard_tail {
            v.push(WILDCARD.to_string());
        }
        v
    }
}

impl fmt::Display for LabelSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.labels.join(", "))?;
        if self.wildcard_tail {
            f.write_str(", *")?;
        }
        f.write_str(")")
    }
}

/// Convenience for tests and examples: `seq(&["Europe", "FRA", "*"])`.
pub fn seq(parts: &[&str]) -> LabelSequence {
    LabelSequence::parse(parts).expect("valid label sequence")
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Locator {
    pub sequences: Vec<LabelSequence>,
}

impl Locator {
    pub fn new(sequences: Vec<LabelSequence>) -> Self {
        Locator { sequences }
    }

    pub fn single(seq: LabelSequence) -> Self {
        Locator {
            sequences: vec![seq],
        }
    }
}

impl fmt::Display for Locator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sequences.iter().map(ToString::to_string).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Half-open leaf ranges on both axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Block {
    pub row_start: usize,
    pub row_end: usize,
    pub col_start: usize,
    pub col_end: usize,
}

impl Block {
    pub fn new(rows: Range<usize>, cols: Range<usize>) -> Self {
        Block {
            row_start: rows.start,
            row_end: rows.end,
            col_start: cols.start,
            col_end: cols.end,
        }
    }

    pub fn cell(row: usize, col: usize) -> Self {
        Self::new(row..row + 1, col..col + 1)
    }

    pub fn rows(&self) -> Range<usize> {
        self.row_start..self.row_end
    }

    pub fn cols(&self) -> Range<usize> {
        self.col_start..self.col_end
    }

    pub fn range(&self, axis: Axis) -> Range<usize> {
        match axis {
            Axis::Row => self.rows(),
            Axis::Col => self.cols(),
        }
    }

    pub fn height(&self) -> usize {
        self.row_end - self.row_start
    }

    pub fn width(&self) -> usize {
        self.col_end - self.col_start
    }

    pub fn is_cell(&self) -> bool {
        self.height() == 1 && self.width() == 1
    }

    pub fn within(&self, model: &TableModel) -> bool {
        let (rows, cols) = model.shape();
        self.row_start < self.row_end
            && self.row_end <= rows
            && self.col_start < self.col_end
            && self.col_end <= cols
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LocatorError {
    #[error("invalid label sequence: {0}")]
    InvalidSequence(String),
    #[error("empty {axis} locator")]
    EmptyLocator { axis: Axis },
    #[error("{axis} label {label:?} not found at level {level}")]
    UnknownLabel {
        axis: Axis,
        label: String,
        level: usize,
    },
    #[error("{axis} sequence {sequence} matches more than one path")]
    AmbiguousSequence { axis: Axis, sequence: String },
    #[error("{axis} sequence {sequence} has {got} labels, the axis has {depth} levels")]
    SequenceLength {
        axis: Axis,
        sequence: String,
        got: usize,
        depth: usize,
    },
    #[error("{axis} locator sequences overlap")]
    Overlapping { axis: Axis },
    #[error("{axis} locator does not address one contiguous run of leaves")]
    NonContiguous { axis: Axis },
    #[error("block {block:?} lies outside the table")]
    OutOfBounds { block: Block },
}

impl LocatorError {
    pub fn code(&self) -> &'static str {
        match self {
            LocatorError::InvalidSequence(_) => "InvalidSequence",
            LocatorError::EmptyLocator { .. } => "EmptyLocator",
            LocatorError::UnknownLabel { .. } => "UnknownLabel",
            LocatorError::AmbiguousSequence { .. } => "AmbiguousSequence",
            LocatorError::SequenceLength { .. } => "SequenceLength",
            LocatorError::Overlapping { .. } => "OverlappingSequences",
            LocatorError::NonContiguous { .. } => "NonContiguous",
            LocatorError::OutOfBounds { .. } => "OutOfBounds",
        }
    }
}

/// Flattened view of one heading axis: parent links, 1-based levels and leaf ranges.
#[derive(Debug)]
pub struct AxisIndex<'a> {
    axis: Axis,
    heading: &'a HeadingAxis,
    nodes: Vec<IndexedNode<'a>>,
    roots: Vec<usize>,
    leaves: Vec<usize>,
    by_id: HashMap<NodeId, usize>,
}

#[derive(Debug)]
struct IndexedNode<'a> {
    node: &'a HeadingNode,
    parent: Option<usize>,
    level: usize,
    leaves: Range<usize>,
    children: Vec<usize>,
}

impl<'a> AxisIndex<'a> {
    pub fn new(model: &'a TableModel, axis: Axis) -> Self {
        Self::from_heading(model.axis(axis), axis)
    }

    pub fn from_heading(heading: &'a HeadingAxis, axis: Axis) -> Self {
        let mut idx = AxisIndex {
            axis,
            heading,
            nodes: Vec::new(),
            roots: Vec::new(),
            leaves: Vec::new(),
            by_id: HashMap::new(),
        };
        let mut next_leaf = 0;
        for r in heading.roots() {
            let i = idx.push(r, None, 1, &mut next_leaf);
            idx.roots.push(i);
        }
        idx
    }

    fn push(
        &mut self,
        node: &'a HeadingNode,
        parent: Option<usize>,
        level: usize,
        next_leaf: &mut usize,
    ) -> usize {
        let i = self.nodes.len();
        let start = *next_leaf;
        self.nodes.push(IndexedNode {
            node,
            parent,
            level,
            leaves: start..start,
            children: Vec::new(),
        });
        self.by_id.insert(node.id, i);
        if node.children.is_empty() {
            *next_leaf += 1;
            self.leaves.push(i);
        } else {
            for c in &node.children {
                let ci = self.push(c, Some(i), level + 1, next_leaf);
                self.nodes[i].children.push(ci);
            }
        }
        self.nodes[i].leaves.end = *next_leaf;
        i
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn depth(&self) -> usize {
        self.heading.depth()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, i: usize) -> &'a HeadingNode {
        self.nodes[i].node
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.nodes[i].parent
    }

    pub fn level(&self, i: usize) -> usize {
        self.nodes[i].level
    }

    pub fn leaf_range(&self, i: usize) -> Range<usize> {
        self.nodes[i].leaves.clone()
    }

    pub fn index_of(&self, id: NodeId) -> Option<usize> {
        self.by_id.get(&id).copied()
    }

    /// Indices of all nodes at a 1-based level in presentation order.
    pub fn at_level(&self, level: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(move |&i| self.nodes[i].level == level)
    }

    /// Root-to-node names.
    pub fn path(&self, mut i: usize) -> Vec<&'a str> {
        let mut out = vec![self.nodes[i].node.name()];
        while let Some(p) = self.nodes[i].parent {
            out.push(self.nodes[p].node.name());
            i = p;
        }
        out.reverse();
        out
    }

    /// Follows names from the roots down; returns the node the path ends on.
    pub fn find(&self, names: &[String]) -> Result<usize, LocatorError> {
        let mut candidates: &[usize] = &self.roots;
        let mut found = None;
        for (depth, name) in names.iter().enumerate() {
            let mut hits = candidates
                .iter()
                .copied()
                .filter(|&c| self.nodes[c].node.name() == name);
            let hit = hits.next().ok_or_else(|| LocatorError::UnknownLabel {
                axis: self.axis,
                label: name.clone(),
                level: depth + 1,
            })?;
            if hits.next().is_some() {
                return Err(LocatorError::AmbiguousSequence {
                    axis: self.axis,
                    sequence: format!("({})", names.join(", ")),
                });
            }
            found = Some(hit);
            candidates = &self.nodes[hit].children;
        }
        found.ok_or_else(|| LocatorError::InvalidSequence("empty sequence".into()))
    }

    /// The node a sequence designates: a leaf, or the subtree root of a wildcard sequence.
    pub fn sequence_node(&self, seq: &LabelSequence) -> Result<usize, LocatorError> {
        let depth = self.depth();
        let n = seq.labels().len();
        let ok = if seq.wildcard_tail() { n < depth } else { n == depth };
        if !ok {
            return Err(LocatorError::SequenceLength {
                axis: self.axis,
                sequence: seq.to_string(),
                got: n,
                depth,
            });
        }
        self.find(seq.labels())
    }

    /// The leaf run covered by a locator.
    pub fn resolve(&self, locator: &Locator) -> Result<Range<usize>, LocatorError> {
        if locator.sequences.is_empty() {
            return Err(LocatorError::EmptyLocator { axis: self.axis });
        }
        let mut ranges = locator
            .sequences
            .iter()
            .map(|s| self.sequence_node(s).map(|i| self.leaf_range(i)))
            .collect::<Result<Vec<_>, _>>()?;
        ranges.sort_by_key(|r| r.start);
        for w in ranges.windows(2) {
            if w[1].start < w[0].end {
                return Err(LocatorError::Overlapping { axis: self.axis });
            }
            if w[1].start != w[0].end {
                return Err(LocatorError::NonContiguous { axis: self.axis });
            }
        }
        Ok(ranges[0].start..ranges[ranges.len() - 1].end)
    }

    /// Minimal locator for a leaf run: maximal covered subtrees become wildcard sequences.
    pub fn cover(&self, range: Range<usize>) -> Locator {
        let mut out = Vec::new();
        self.cover_into(&self.roots, &range, &mut out);
        Locator::new(out)
    }

    fn cover_into(&self, nodes: &[usize], range: &Range<usize>, out: &mut Vec<LabelSequence>) {
        for &i in nodes {
            let r = &self.nodes[i].leaves;
            if r.end <= range.start || r.start >= range.end {
                continue;
            }
            if range.start <= r.start && r.end <= range.end {
                out.push(self.sequence_for(i));
            } else {
                self.cover_into(&self.nodes[i].children, range, out);
            }
        }
    }

    /// Canonical sequence designating exactly the subtree at `i`.
    pub fn sequence_for(&self, i: usize) -> LabelSequence {
        let labels = self.path(i).into_iter().map(str::to_string).collect();
        let wildcard = !self.nodes[i].node.is_leaf();
        LabelSequence::new(labels, wildcard).expect("heading labels are never empty or '*'")
    }

    /// The deepest node on a leaf's path at the given 1-based level.
    pub fn ancestor_at(&self, leaf: usize, level: usize) -> usize {
        let mut i = self
            .leaf_node(leaf)
            .expect("leaf index within the axis");
        while self.nodes[i].level > level {
            i = self.nodes[i].parent.expect("levels start at 1");
        }
        i
    }

    /// Node index of the `k`-th leaf.
    pub fn leaf_node(&self, k: usize) -> Option<usize> {
        self.leaves.get(k).copied()
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }
}

/// Full-depth sequence of every leaf, in presentation order.
pub fn leaf_sequences(axis: &HeadingAxis) -> Vec<LabelSequence> {
    let mut out = Vec::with_capacity(axis.leaf_count());
    axis.for_each_leaf_path(|path| {
        out.push(LabelSequence {
            labels: path.iter().map(|n| n.name().to_string()).collect(),
            wildcard_tail: false,
        })
    });
    out
}

pub fn resolve_locator(
    model: &TableModel,
    row: &Locator,
    col: &Locator,
) -> Result<Block, LocatorError> {
    let rows = AxisIndex::new(model, Axis::Row).resolve(row)?;
    let cols = AxisIndex::new(model, Axis::Col).resolve(col)?;
    Ok(Block::new(rows, cols))
}

/// Canonical (minimal) locators for a block.
pub fn locator_of(model: &TableModel, block: &Block) -> Result<(Locator, Locator), LocatorError> {
    if !block.within(model) {
        return Err(LocatorError::OutOfBounds { block: *block });
    }
    let row = AxisIndex::new(model, Axis::Row).cover(block.rows());
    let col = AxisIndex::new(model, Axis::Col).cover(block.cols());
    Ok((row, col))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingleSubtree {
    pub row: bool,
    pub col: bool,
}

/// A user-selected cell or block with its canonical locators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableUnit {
    pub block: Block,
    pub row_locator: Locator,
    pub col_locator: Locator,
    pub single_subtree: SingleSubtree,
}

impl TableUnit {
    pub fn from_block(model: &TableModel, block: Block) -> Result<Self, LocatorError> {
        let (row_locator, col_locator) = locator_of(model, &block)?;
        let single_subtree = SingleSubtree {
            row: row_locator.sequences.len() == 1,
            col: col_locator.sequences.len() == 1,
        };
        Ok(TableUnit {
            block,
            row_locator,
            col_locator,
            single_subtree,
        })
    }

    /// Resolves user locators and stores their canonical form.
    pub fn from_locators(
        model: &TableModel,
        row: &Locator,
        col: &Locator,
    ) -> Result<Self, LocatorError> {
        let block = resolve_locator(model, row, col)?;
        Self::from_block(model, block)
    }

    pub fn locator(&self, axis: Axis) -> &Locator {
        match axis {
            Axis::Row => &self.row_locator,
            Axis::Col => &self.col_locator,
        }
    }
}
