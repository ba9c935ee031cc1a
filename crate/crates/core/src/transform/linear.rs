//! Inserting and removing derived aggregate labels.

use crate::model::{Axis, HeadingAxis, HeadingNode, Label, LabelKind, Matrix, Stat, TableModel, Value};

use super::{check_level, finish, select_along, TransformError};

enum Source {
    Leaf(usize),
    Agg(Vec<usize>),
}

fn plain_leaves(children: &[HeadingNode], offset: usize, out: &mut Vec<usize>) {
    let mut off = offset;
    for c in children {
        if !c.label.is_derived() {
            if c.is_leaf() {
                out.push(off);
            } else {
                plain_leaves(&c.children, off, out);
            }
        }
        off += c.leaf_count();
    }
}

/// Adds a derived `stat` child as the first child of every plain node at `level`.
/// Its entries aggregate the node's non-derived leaves.
pub fn to_linear(model: &TableModel, axis: Axis, level: usize, stat: Stat) -> Result<TableModel, TransformError> {
    let heading = model.axis(axis);
    let depth = heading.depth();
    check_level(axis, level, depth.saturating_sub(1))?;

    struct Walk {
        target: usize,
        pad: usize,
        stat: Stat,
        cursor: usize,
        src: Vec<Source>,
    }
    fn walk(nodes: &[HeadingNode], level: usize, w: &mut Walk) -> Result<Vec<HeadingNode>, TransformError> {
        let mut out = Vec::with_capacity(nodes.len());
        for n in nodes {
            if level < w.target {
                let children = walk(&n.children, level + 1, w)?;
                out.push(HeadingNode::new(n.label.clone(), children));
                continue;
            }
            let count = n.leaf_count();
            if !n.label.is_derived() {
                if n
                    .children
                    .iter()
                    .any(|c| c.label.kind == LabelKind::Derived(w.stat) || c.name() == w.stat.symbol())
                {
                    return Err(TransformError::DuplicateDerived {
                        label: n.name().to_string(),
                        stat: w.stat,
                    });
                }
                let mut group = Vec::new();
                plain_leaves(&n.children, w.cursor, &mut group);
                w.src.push(Source::Agg(group));
                let mut children = Vec::with_capacity(n.children.len() + 1);
                children.push(super::chain(&vec![Label::derived(w.stat); w.pad]));
                children.extend(n.children.iter().cloned());
                out.push(HeadingNode::new(n.label.clone(), children));
            } else {
                out.push(n.clone());
            }
            w.src.extend((w.cursor..w.cursor + count).map(Source::Leaf));
            w.cursor += count;
        }
        Ok(out)
    }
    let mut w = Walk {
        target: level,
        pad: depth - level,
        stat,
        cursor: 0,
        src: Vec::with_capacity(heading.leaf_count()),
    };
    let roots = walk(heading.roots(), 1, &mut w)?;
    let entries = aggregate_along(model, axis, &w.src, stat)?;
    let linear = HeadingAxis::from_parts_unchecked(roots, depth, heading.level_names().to_vec());
    finish(model, axis, linear, model.axis(axis.other()).clone(), entries)
}

fn aggregate_along(model: &TableModel, axis: Axis, src: &[Source], stat: Stat) -> Result<Matrix<Value>, TransformError> {
    let e = model.entries();
    let cross = match axis {
        Axis::Row => e.cols(),
        Axis::Col => e.rows(),
    };
    let at = |along: usize, x: usize| match axis {
        Axis::Row => e.get(along, x),
        Axis::Col => e.get(x, along),
    };
    // Built along-major, transposed at the end for columns.
    let mut data = Vec::with_capacity(src.len() * cross);
    for s in src {
        match s {
            Source::Leaf(i) => data.extend((0..cross).map(|x| at(*i, x).clone())),
            Source::Agg(group) => {
                for x in 0..cross {
                    let mut nums = Vec::with_capacity(group.len());
                    for &i in group {
                        match at(i, x) {
                            Value::Number(v) => nums.push(*v),
                            Value::Missing => {}
                            Value::Text(t) => {
                                return Err(TransformError::NonNumeric {
                                    detail: format!("{axis} leaf {i} holds {t:?}"),
                                })
                            }
                        }
                    }
                    data.push(stat.apply(nums).map_or(Value::Missing, Value::number));
                }
            }
        }
    }
    let m = Matrix::from_vec(src.len(), cross, data).expect("sized above");
    Ok(match axis {
        Axis::Row => m,
        Axis::Col => m.transposed(),
    })
}

/// Removes every derived child of the plain nodes at `level`.
pub fn to_stacked(model: &TableModel, axis: Axis, level: usize) -> Result<TableModel, TransformError> {
    let heading = model.axis(axis);
    let depth = heading.depth();
    check_level(axis, level, depth.saturating_sub(1))?;

    struct Walk {
        target: usize,
        cursor: usize,
        keep: Vec<usize>,
        removed: usize,
    }
    fn walk(nodes: &[HeadingNode], level: usize, w: &mut Walk) -> Result<Vec<HeadingNode>, TransformError> {
        let mut out = Vec::with_capacity(nodes.len());
        for n in nodes {
            if level < w.target {
                let children = walk(&n.children, level + 1, w)?;
                out.push(HeadingNode::new(n.label.clone(), children));
                continue;
            }
            if n.label.is_derived() {
                let count = n.leaf_count();
                w.keep.extend(w.cursor..w.cursor + count);
                w.cursor += count;
                out.push(n.clone());
                continue;
            }
            let mut children = Vec::with_capacity(n.children.len());
            for c in &n.children {
                let count = c.leaf_count();
                if c.label.is_derived() {
                    w.removed += 1;
                } else {
                    w.keep.extend(w.cursor..w.cursor + count);
                    children.push(c.clone());
                }
                w.cursor += count;
            }
            if children.is_empty() {
                return Err(TransformError::EmptyGroup {
                    label: n.name().to_string(),
                });
            }
            out.push(HeadingNode::new(n.label.clone(), children));
        }
        Ok(out)
    }
    let mut w = Walk {
        target: level,
        cursor: 0,
        keep: Vec::with_capacity(heading.leaf_count()),
        removed: 0,
    };
    let roots = walk(heading.roots(), 1, &mut w)?;
    if w.removed == 0 {
        return Err(TransformError::NothingToRemove { axis, level });
    }
    let entries = select_along(model.entries(), axis, &w.keep);
    let stacked = HeadingAxis::from_parts_unchecked(roots, depth, heading.level_names().to_vec());
    finish(model, axis, stacked, model.axis(axis.other()).clone(), entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::{flat, regional_sales, regional_sales_stacked};
    use crate::locator::leaf_sequences;

    #[test]
    fn sums_are_inserted_first() {
        let m = regional_sales_stacked();
        let l = to_linear(&m, Axis::Col, 1, Stat::Sum).unwrap();
        assert_eq!(l.shape(), (8, 6));
        assert_eq!(l.entry(1, 0), &Value::Number(250.0));
        assert!(l.same_content(&regional_sales()));
    }

    #[test]
    fn stacked_fixture_drops_totals() {
        let m = regional_sales();
        let s = to_stacked(&m, Axis::Col, 1).unwrap();
        assert_eq!(s.shape(), (8, 4));
        let leaves: Vec<String> = leaf_sequences(s.col_axis()).iter().map(|q| q.to_string()).collect();
        assert_eq!(leaves, ["(2020, spr)", "(2020, aut)", "(2021, spr)", "(2021, aut)"]);
        assert!(s.same_content(&regional_sales_stacked()));
        assert_eq!(to_stacked(&s, Axis::Col, 1).unwrap_err().code(), "NothingToRemove");
    }

    #[test]
    fn linear_then_stacked_is_identity() {
        let m = regional_sales_stacked();
        for stat in [Stat::Sum, Stat::Avg, Stat::Min, Stat::Max] {
            let l = to_linear(&m, Axis::Row, 2, stat).unwrap();
            assert_eq!(l.shape(), (12, 4));
            assert!(to_stacked(&l, Axis::Row, 2).unwrap().same_content(&m));
        }
    }

    #[test]
    fn padding_reaches_full_depth() {
        let m = regional_sales_stacked();
        let l = to_linear(&m, Axis::Row, 1, Stat::Max).unwrap();
        assert_eq!(l.shape(), (10, 4));
        let first = leaf_sequences(l.row_axis())[0].to_string();
        assert_eq!(first, "(Asia, max, max)");
        assert_eq!(l.entry(0, 0), &Value::Number(131.0));
        assert_eq!(l.entry(5, 3), &Value::Number(97.0));
    }

    #[test]
    fn duplicate_and_text_are_rejected() {
        let m = regional_sales();
        assert_eq!(
            to_linear(&m, Axis::Col, 1, Stat::Sum).unwrap_err().code(),
            "DuplicateDerived"
        );
        let f = crate::transform::fold(&regional_sales_stacked(), 2).unwrap();
        assert_eq!(to_linear(&f, Axis::Row, 3, Stat::Sum).unwrap_err().code(), "NonNumeric");
    }

    #[test]
    fn missing_values_are_skipped() {
        let row = |vals: [f64; 2]| vals.to_vec();
        let f = flat(&["a", "b"], &["x", "y"], vec![row([1.0, f64::NAN]), row([f64::NAN, f64::NAN])]);
        let deep = crate::model::TableModel::new(
            HeadingAxis::with_default_names(
                vec![
                    HeadingNode::new(Label::plain("a"), vec![HeadingNode::leaf(Label::plain("x"))]),
                    HeadingNode::new(Label::plain("b"), vec![HeadingNode::leaf(Label::plain("x"))]),
                ],
                Axis::Row,
            )
            .unwrap(),
            f.col_axis().clone(),
            f.entries().clone(),
        )
        .unwrap();
        let l = to_linear(&deep, Axis::Row, 1, Stat::Avg).unwrap();
        assert_eq!(l.entry(0, 0), &Value::Number(1.0));
        assert_eq!(l.entry(0, 1), &Value::Missing);
        assert_eq!(l.entry(2, 1), &Value::Missing);
    }
}
