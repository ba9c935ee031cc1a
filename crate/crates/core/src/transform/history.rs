//! Undo/redo over a sequence of transformations.

use crate::model::TableModel;

use super::{apply, apply_script, ScriptError, TransformError, TransformOp};

/// The starting model plus every applied op with the model it produced.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    initial: TableModel,
    done: Vec<(TransformOp, TableModel)>,
    undone: Vec<(TransformOp, TableModel)>,
}

impl History {
    pub fn new(initial: TableModel) -> Self {
        History {
            initial,
            done: Vec::new(),
            undone: Vec::new(),
        }
    }

    pub fn initial(&self) -> &TableModel {
        &self.initial
    }

    pub fn current(&self) -> &TableModel {
        self.done.last().map_or(&self.initial, |(_, m)| m)
    }

    /// Ops that produced the current model, oldest first.
    pub fn ops(&self) -> Vec<TransformOp> {
        self.done.iter().map(|(op, _)| op.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.done.len()
    }

    pub fn is_empty(&self) -> bool {
        self.done.is_empty()
    }

    pub fn can_redo(&self) -> bool {
        !self.undone.is_empty()
    }

    /// Applies `op` to the current model. Clears the redo stack on success.
    pub fn push(&mut self, op: TransformOp) -> Result<&TableModel, TransformError> {
        let next = apply(self.current(), &op)?;
        self.done.push((op, next));
        self.undone.clear();
        Ok(self.current())
    }

    /// Applies all ops or none.
    pub fn push_all(&mut self, ops: &[TransformOp]) -> Result<&TableModel, ScriptError> {
        let mut staged = Vec::with_capacity(ops.len());
        let mut cur = self.current().clone();
        for (index, op) in ops.iter().enumerate() {
            match apply(&cur, op) {
                Ok(next) => {
                    cur = next.clone();
                    staged.push((op.clone(), next));
                }
                Err(error) => {
                    return Err(ScriptError {
                        index,
                        error,
                        last_good: Box::new(cur),
                    })
                }
            }
        }
        if !staged.is_empty() {
            self.done.extend(staged);
            self.undone.clear();
        }
        Ok(self.current())
    }

    pub fn undo(&mut self) -> Result<&TableModel, TransformError> {
        let step = self.done.pop().ok_or(TransformError::EmptyHistory)?;
        self.undone.push(step);
        Ok(self.current())
    }

    pub fn redo(&mut self) -> Result<&TableModel, TransformError> {
        let step = self.undone.pop().ok_or(TransformError::EmptyHistory)?;
        self.done.push(step);
        Ok(self.current())
    }

    /// Re-applies the recorded ops to the initial model.
    pub fn replay(&self) -> Result<TableModel, ScriptError> {
        apply_script(&self.initial, &self.ops())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::regional_sales;
    use crate::model::{Axis, Stat};

    fn swap() -> TransformOp {
        TransformOp::Swap {
            axis: Axis::Col,
            upper_level: 1,
        }
    }

    #[test]
    fn undo_restores_the_fixture() {
        let m = regional_sales();
        let mut h = History::new(m.clone());
        h.push(swap()).unwrap();
        assert_eq!(h.current().version(), 2);
        assert_eq!(h.undo().unwrap(), &m);
        assert_eq!(h.redo().unwrap().version(), 2);
    }

    #[test]
    fn undo_on_fresh_history_fails() {
        let mut h = History::new(regional_sales());
        assert_eq!(h.undo().unwrap_err().code(), "EmptyHistory");
        assert_eq!(h.redo().unwrap_err().code(), "EmptyHistory");
    }

    #[test]
    fn undo_twice_after_three_ops() {
        let m = regional_sales();
        let mut h = History::new(m.clone());
        let first = TransformOp::ToStacked {
            axis: Axis::Col,
            level: 1,
        };
        h.push(first.clone()).unwrap();
        h.push(swap()).unwrap();
        h.push(TransformOp::TransposeTable).unwrap();
        h.undo().unwrap();
        h.undo().unwrap();
        assert_eq!(h.current(), &apply(&m, &first).unwrap());
        assert_eq!(h.replay().unwrap(), *h.current());
    }

    #[test]
    fn push_all_is_atomic() {
        let mut h = History::new(regional_sales());
        let err = h
            .push_all(&[
                swap(),
                TransformOp::ToLinear {
                    axis: Axis::Row,
                    level: 1,
                    stat: Stat::Sum,
                },
                TransformOp::Swap {
                    axis: Axis::Row,
                    upper_level: 2,
                },
            ])
            .unwrap_err();
        assert_eq!(err.index, 2);
        assert!(h.is_empty());
        h.push_all(&[swap(), swap()]).unwrap();
        assert_eq!(h.len(), 2);
    }
}
