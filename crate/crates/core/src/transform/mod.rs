//! Structure-preserving table rewrites: swap/transpose, to_linear/to_stacked, fold/unfold.

mod fold;
mod history;
mod levels;
mod linear;

pub use fold::{fold, unfold, VALUE_COLUMN};
pub use history::History;
pub use levels::{swap, transpose_level, transpose_table};
pub use linear::{to_linear, to_stacked};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Axis, HeadingAxis, HeadingNode, Label, Matrix, ModelError, Stat, TableModel, Value};

/// One transformation step, as used in scripts and by the service API.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum TransformOp {
    Swap { axis: Axis, upper_level: usize },
    TransposeLevel { source_axis: Axis, level: usize },
    TransposeTable,
    ToLinear { axis: Axis, level: usize, stat: Stat },
    ToStacked { axis: Axis, level: usize },
    Fold { level: usize },
    Unfold { key_col_leaf: usize, value_col_leaf: usize },
}

impl TransformOp {
    pub fn name(&self) -> &'static str {
        match self {
            TransformOp::Swap { .. } => "swap",
            TransformOp::TransposeLevel { .. } => "transpose_level",
            TransformOp::TransposeTable => "transpose_table",
            TransformOp::ToLinear { .. } => "to_linear",
            TransformOp::ToStacked { .. } => "to_stacked",
            TransformOp::Fold { .. } => "fold",
            TransformOp::Unfold { .. } => "unfold",
        }
    }
}

impl fmt::Display for TransformOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransformOp::Swap { axis, upper_level } => write!(f, "swap({axis}, {upper_level})"),
            TransformOp::TransposeLevel { source_axis, level } => {
                write!(f, "transpose_level({source_axis}, {level})")
            }
            TransformOp::TransposeTable => f.write_str("transpose_table()"),
            TransformOp::ToLinear { axis, level, stat } => {
                write!(f, "to_linear({axis}, {level}, {})", stat.symbol())
            }
            TransformOp::ToStacked { axis, level } => write!(f, "to_stacked({axis}, {level})"),
            TransformOp::Fold { level } => write!(f, "fold({level})"),
            TransformOp::Unfold {
                key_col_leaf,
                value_col_leaf,
            } => write!(f, "unfold({key_col_leaf}, {value_col_leaf})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error("{axis} level {level} is not uniform: {detail}")]
    NotUniform { axis: Axis, level: usize, detail: String },
    #[error("cannot remove the only level of the {axis} headings")]
    LastLevel { axis: Axis },
    #[error("text entry in an aggregated slice: {detail}")]
    NonNumeric { detail: String },
    #[error("{label:?} already has a derived {stat:?} child")]
    DuplicateDerived { label: String, stat: Stat },
    #[error("no derived labels below {axis} level {level}")]
    NothingToRemove { axis: Axis, level: usize },
    #[error("{label:?} would be left without children")]
    EmptyGroup { label: String },
    #[error("column level {level} holds derived labels; remove them first")]
    DerivedPresent { level: usize },
    #[error("column {leaf} is not categorical (all text)")]
    NotCategorical { leaf: usize },
    #[error("column {leaf} is not numeric")]
    NotNumeric { leaf: usize },
    #[error("irregular groups: {detail}")]
    IrregularGroups { detail: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("nothing to undo or redo")]
    EmptyHistory,
    #[error(transparent)]
    Invalid(#[from] ModelError),
}

impl TransformError {
    pub fn code(&self) -> &'static str {
        match self {
            TransformError::NotUniform { .. } => "NotUniform",
            TransformError::LastLevel { .. } => "LastLevel",
            TransformError::NonNumeric { .. } => "NonNumeric",
            TransformError::DuplicateDerived { .. } => "DuplicateDerived",
            TransformError::NothingToRemove { .. } => "NothingToRemove",
            TransformError::EmptyGroup { .. } => "EmptyGroup",
            TransformError::DerivedPresent { .. } => "DerivedPresent",
            TransformError::NotCategorical { .. } => "NotCategorical",
            TransformError::NotNumeric { .. } => "NotNumeric",
            TransformError::IrregularGroups { .. } => "IrregularGroups",
            TransformError::InvalidParameter(_) => "InvalidParameter",
            TransformError::EmptyHistory => "EmptyHistory",
            TransformError::Invalid(_) => "InvalidModel",
        }
    }
}

/// Failure inside [`apply_script`]: which op failed and the model just before it.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{} at op {index}: {error}", error.code())]
pub struct ScriptError {
    pub index: usize,
    pub error: TransformError,
    pub last_good: Box<TableModel>,
}

pub fn apply(model: &TableModel, op: &TransformOp) -> Result<TableModel, TransformError> {
    match *op {
        TransformOp::Swap { axis, upper_level } => swap(model, axis, upper_level),
        TransformOp::TransposeLevel { source_axis, level } => transpose_level(model, source_axis, level),
        TransformOp::TransposeTable => Ok(transpose_table(model)),
        TransformOp::ToLinear { axis, level, stat } => to_linear(model, axis, level, stat),
        TransformOp::ToStacked { axis, level } => to_stacked(model, axis, level),
        TransformOp::Fold { level } => fold(model, level),
        TransformOp::Unfold {
            key_col_leaf,
            value_col_leaf,
        } => unfold(model, key_col_leaf, value_col_leaf),
    }
}

pub fn apply_script(model: &TableModel, ops: &[TransformOp]) -> Result<TableModel, ScriptError> {
    let mut current = model.clone();
    for (index, op) in ops.iter().enumerate() {
        match apply(&current, op) {
            Ok(next) => current = next,
            Err(error) => {
                return Err(ScriptError {
                    index,
                    error,
                    last_good: Box::new(current),
                })
            }
        }
    }
    Ok(current)
}

fn check_level(axis: Axis, level: usize, max: usize) -> Result<(), TransformError> {
    if level == 0 || level > max {
        Err(TransformError::InvalidParameter(format!(
            "{axis} level {level} is outside 1..={max}"
        )))
    } else {
        Ok(())
    }
}

fn finish(
    model: &TableModel,
    axis: Axis,
    changed: HeadingAxis,
    other: HeadingAxis,
    entries: Matrix<Value>,
) -> Result<TableModel, TransformError> {
    let (rows, cols) = match axis {
        Axis::Row => (changed, other),
        Axis::Col => (other, changed),
    };
    Ok(TableModel::new(rows, cols, entries)?.with_version(model.version() + 1))
}

/// Picks, for every new leaf along `axis`, the old leaf whose slice it copies.
fn select_along(entries: &Matrix<Value>, axis: Axis, src: &[usize]) -> Matrix<Value> {
    match axis {
        Axis::Row => Matrix::from_fn(src.len(), entries.cols(), |r, c| entries.get(src[r], c).clone()),
        Axis::Col => Matrix::from_fn(entries.rows(), src.len(), |r, c| entries.get(r, src[c]).clone()),
    }
}

/// Copies `axis` with `labels` appended as a new bottom level under every leaf.
fn append_level(axis: &HeadingAxis, labels: &[Label], name: String) -> HeadingAxis {
    fn walk(n: &HeadingNode, labels: &[Label]) -> HeadingNode {
        let children = if n.is_leaf() {
            labels.iter().cloned().map(HeadingNode::leaf).collect()
        } else {
            n.children.iter().map(|c| walk(c, labels)).collect()
        };
        HeadingNode::new(n.label.clone(), children)
    }
    let mut names = axis.level_names().to_vec();
    names.push(name);
    HeadingAxis::from_parts_unchecked(
        axis.roots().iter().map(|r| walk(r, labels)).collect(),
        axis.depth() + 1,
        names,
    )
}

/// A path of `labels.len()` nodes, each the only child of the one above.
fn chain(labels: &[Label]) -> HeadingNode {
    let (first, rest) = labels.split_first().expect("chain needs a label");
    let children = if rest.is_empty() { Vec::new() } else { vec![chain(rest)] };
    HeadingNode::new(first.clone(), children)
}
