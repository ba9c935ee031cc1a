//! Fold (heading level into a key column) and unfold (key column into a heading level).

use std::collections::HashMap;

use crate::model::{Axis, HeadingAxis, HeadingNode, Label, Matrix, TableModel, Value};

use super::levels::{remove_level, Removed};
use super::{append_level, chain, check_level, finish, TransformError};

/// Name of the single value column left when a one-level column axis is folded.
pub const VALUE_COLUMN: &str = "value";

fn is_chain(n: &HeadingNode) -> bool {
    match n.children.as_slice() {
        [] => true,
        [only] => is_chain(only),
        _ => false,
    }
}

fn chain_labels(n: &HeadingNode) -> Vec<Label> {
    let mut out = vec![n.label.clone()];
    let mut cur = n;
    while let Some(c) = cur.children.first() {
        out.push(c.label.clone());
        cur = c;
    }
    out
}

fn column_all(model: &TableModel, col: usize, f: impl Fn(&Value) -> bool) -> bool {
    (0..model.shape().0).all(|r| f(model.entry(r, col)))
}

enum FoldSrc {
    NewKey,
    Copy(usize),
    Value(usize),
}

/// Moves column `level` into a new leftmost key column. Each row leaf is replicated once
/// per folded label, with the key varying fastest.
///
/// Root columns that are chains holding only text are key columns from earlier folds;
/// they are carried along and excluded from the folded part.
pub fn fold(model: &TableModel, level: usize) -> Result<TableModel, TransformError> {
    let cols = model.col_axis();
    let depth = cols.depth();
    check_level(Axis::Col, level, depth)?;
    let key_name = cols.level_name(level).to_string();

    let mut key_roots = Vec::new();
    let mut value_roots = Vec::new();
    let mut value_leaves = Vec::new();
    let mut off = 0;
    for root in cols.roots() {
        let n = root.leaf_count();
        if is_chain(root) && column_all(model, off, Value::is_text) {
            key_roots.push((root, off));
        } else {
            value_roots.push(root.clone());
            value_leaves.extend(off..off + n);
        }
        off += n;
    }
    if value_roots.is_empty() {
        return Err(TransformError::InvalidParameter(
            "no value columns to fold".to_string(),
        ));
    }
    let folded_axis = HeadingAxis::from_parts_unchecked(value_roots, depth, Vec::new());
    if folded_axis
        .nodes_at_level(level)
        .iter()
        .any(|n| n.label.is_derived())
    {
        return Err(TransformError::DerivedPresent { level });
    }
    let (value_roots, _, _) = folded_axis.into_parts();

    let Removed { roots, labels, map } = if depth == 1 {
        let k = value_roots.len();
        Removed {
            roots: vec![HeadingNode::leaf(Label::plain(VALUE_COLUMN))],
            labels: value_roots.into_iter().map(|n| n.label).collect(),
            map: (0..k).map(|j| (0, j)).collect(),
        }
    } else {
        remove_level(&value_roots, level).map_err(|detail| TransformError::NotUniform {
            axis: Axis::Col,
            level,
            detail,
        })?
    };
    let k = labels.len();
    let mut inv = vec![0; map.len()];
    for (i, &(new, j)) in map.iter().enumerate() {
        inv[new * k + j] = value_leaves[i];
    }

    let new_depth = depth.saturating_sub(1).max(1);
    let mut new_roots = vec![chain(&vec![Label::plain(key_name.clone()); new_depth])];
    let mut src = vec![FoldSrc::NewKey];
    for (root, off) in &key_roots {
        let mut l = chain_labels(root);
        l.truncate(new_depth);
        new_roots.push(chain(&l));
        src.push(FoldSrc::Copy(*off));
    }
    let n_values = map.len() / k;
    new_roots.extend(roots);
    src.extend((0..n_values).map(FoldSrc::Value));
    let names = if depth == 1 {
        vec![VALUE_COLUMN.to_string()]
    } else {
        let mut n = cols.level_names().to_vec();
        n.remove(level - 1);
        n
    };
    let new_cols = HeadingAxis::from_parts_unchecked(new_roots, new_depth, names);
    let new_rows = append_level(model.row_axis(), &labels, key_name);

    let e = model.entries();
    let entries = Matrix::from_fn(e.rows() * k, src.len(), |nr, nc| {
        let (r, j) = (nr / k, nr % k);
        match src[nc] {
            FoldSrc::NewKey => Value::Text(labels[j].name.clone()),
            FoldSrc::Copy(c) => e.get(r, c).clone(),
            FoldSrc::Value(v) => e.get(r, inv[v * k + j]).clone(),
        }
    });
    finish(model, Axis::Col, new_cols, new_rows, entries)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Text,
    Numeric,
    Mixed,
}

enum UnfoldSrc {
    Text(usize),
    Lift(usize, usize),
}

/// Lifts the text values of `key_col_leaf` into a new bottom column level.
///
/// Rows are grouped by their parent heading and by every other text column; each group
/// must hold exactly one row per distinct key. Every numeric column is spread across
/// the keys, and the bottom row level is dropped.
pub fn unfold(model: &TableModel, key_col_leaf: usize, value_col_leaf: usize) -> Result<TableModel, TransformError> {
    let (n_rows, n_cols) = model.shape();
    for leaf in [key_col_leaf, value_col_leaf] {
        if leaf >= n_cols {
            return Err(TransformError::InvalidParameter(format!(
                "column leaf {leaf} is outside 0..{n_cols}"
            )));
        }
    }
    if key_col_leaf == value_col_leaf {
        return Err(TransformError::InvalidParameter(
            "key and value columns must differ".to_string(),
        ));
    }
    let kinds: Vec<ColKind> = (0..n_cols)
        .map(|c| {
            if column_all(model, c, Value::is_text) {
                ColKind::Text
            } else if column_all(model, c, |v| !v.is_text()) {
                ColKind::Numeric
            } else {
                ColKind::Mixed
            }
        })
        .collect();
    if kinds[key_col_leaf] != ColKind::Text {
        return Err(TransformError::NotCategorical { leaf: key_col_leaf });
    }
    if kinds[value_col_leaf] != ColKind::Numeric {
        return Err(TransformError::NotNumeric { leaf: value_col_leaf });
    }
    if let Some(leaf) = kinds.iter().position(|k| *k == ColKind::Mixed) {
        return Err(TransformError::NotNumeric { leaf });
    }

    let text = |r: usize, c: usize| match model.entry(r, c) {
        Value::Text(s) => s.as_str(),
        _ => unreachable!("text column"),
    };
    let mut keys: Vec<&str> = Vec::new();
    let mut key_pos: HashMap<&str, usize> = HashMap::new();
    for r in 0..n_rows {
        let t = text(r, key_col_leaf);
        key_pos.entry(t).or_insert_with(|| {
            keys.push(t);
            keys.len() - 1
        });
    }
    let k = keys.len();
    let text_cols: Vec<usize> = (0..n_cols)
        .filter(|&c| c != key_col_leaf && kinds[c] == ColKind::Text)
        .collect();

    let rows = model.row_axis();
    let row_depth = rows.depth();
    let mut parent_of = Vec::with_capacity(n_rows);
    if row_depth >= 2 {
        let mut prev: Option<*const HeadingNode> = None;
        let mut idx = 0usize;
        rows.for_each_leaf_path(|path| {
            let p: *const HeadingNode = path[row_depth - 2];
            if prev.is_some_and(|q| q != p) {
                idx += 1;
            }
            prev = Some(p);
            parent_of.push(idx);
        });
    } else {
        parent_of.resize(n_rows, 0);
    }

    let mut group_of: HashMap<(usize, Vec<&str>), usize> = HashMap::new();
    let mut members: Vec<Vec<Option<usize>>> = Vec::new();
    for r in 0..n_rows {
        let gk = (parent_of[r], text_cols.iter().map(|&c| text(r, c)).collect());
        let g = *group_of.entry(gk).or_insert_with(|| {
            members.push(vec![None; k]);
            members.len() - 1
        });
        let slot = &mut members[g][key_pos[text(r, key_col_leaf)]];
        if slot.is_some() {
            return Err(TransformError::IrregularGroups {
                detail: format!(
                    "key {:?} appears twice in group {g}",
                    text(r, key_col_leaf)
                ),
            });
        }
        *slot = Some(r);
    }
    let members: Vec<Vec<usize>> = members
        .into_iter()
        .enumerate()
        .map(|(g, m)| {
            m.into_iter()
                .enumerate()
                .map(|(j, r)| {
                    r.ok_or_else(|| TransformError::IrregularGroups {
                        detail: format!("group {g} lacks key {:?}", keys[j]),
                    })
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let n_groups = members.len();

    let new_rows = if row_depth >= 2 {
        let n_parents = parent_of.last().map_or(0, |p| p + 1);
        if n_parents != n_groups {
            return Err(TransformError::IrregularGroups {
                detail: "rows under one parent fall into several groups".to_string(),
            });
        }
        fn drop_bottom(n: &HeadingNode, level: usize, depth: usize) -> HeadingNode {
            let children = if level + 1 == depth {
                Vec::new()
            } else {
                n.children.iter().map(|c| drop_bottom(c, level + 1, depth)).collect()
            };
            HeadingNode::new(n.label.clone(), children)
        }
        let mut names = rows.level_names().to_vec();
        names.pop();
        HeadingAxis::from_parts_unchecked(
            rows.roots().iter().map(|r| drop_bottom(r, 1, row_depth)).collect(),
            row_depth - 1,
            names,
        )
    } else {
        HeadingAxis::from_parts_unchecked(
            (1..=n_groups)
                .map(|i| HeadingNode::leaf(Label::plain(format!("r{i}"))))
                .collect(),
            1,
            Axis::Row.default_level_names(1),
        )
    };

    let cols = model.col_axis();
    let numeric: Vec<usize> = (0..n_cols)
        .filter(|&c| kinds[c] == ColKind::Numeric)
        .collect();
    let key_leaf_name = {
        let mut name = String::new();
        let mut i = 0;
        cols.for_each_leaf_path(|p| {
            if i == key_col_leaf {
                name = p[p.len() - 1].name().to_string();
            }
            i += 1;
        });
        name
    };
    let replace_value = cols.depth() == 1
        && numeric == [value_col_leaf]
        && cols.roots()[value_col_leaf].name() == super::fold::VALUE_COLUMN;
    let key_labels: Vec<Label> = keys.iter().map(|s| Label::plain(*s)).collect();

    struct Build<'a> {
        kinds: &'a [ColKind],
        key: usize,
        replace_value: bool,
        key_labels: &'a [Label],
        cursor: usize,
        src: Vec<UnfoldSrc>,
    }
    fn walk(nodes: &[HeadingNode], b: &mut Build<'_>) -> Vec<HeadingNode> {
        let mut out = Vec::new();
        for n in nodes {
            if !n.is_leaf() {
                let children = walk(&n.children, b);
                if !children.is_empty() {
                    out.push(HeadingNode::new(n.label.clone(), children));
                }
                continue;
            }
            let c = b.cursor;
            b.cursor += 1;
            if c == b.key {
                continue;
            }
            match b.kinds[c] {
                ColKind::Text => {
                    b.src.push(UnfoldSrc::Text(c));
                    out.push(if b.replace_value {
                        n.clone()
                    } else {
                        HeadingNode::new(n.label.clone(), vec![HeadingNode::leaf(n.label.clone())])
                    });
                }
                _ => {
                    b.src.extend((0..b.key_labels.len()).map(|j| UnfoldSrc::Lift(c, j)));
                    let keys = b.key_labels.iter().cloned().map(HeadingNode::leaf);
                    if b.replace_value {
                        out.extend(keys);
                    } else {
                        out.push(HeadingNode::new(n.label.clone(), keys.collect()));
                    }
                }
            }
        }
        out
    }
    let mut b = Build {
        kinds: &kinds,
        key: key_col_leaf,
        replace_value,
        key_labels: &key_labels,
        cursor: 0,
        src: Vec::with_capacity(n_cols * k),
    };
    let col_roots = walk(cols.roots(), &mut b);
    let (new_depth, names) = if replace_value {
        (1, vec![key_leaf_name])
    } else {
        let mut n = cols.level_names().to_vec();
        n.push(key_leaf_name);
        (cols.depth() + 1, n)
    };
    let new_cols = HeadingAxis::from_parts_unchecked(col_roots, new_depth, names);

    let src = b.src;
    let entries = Matrix::from_fn(n_groups, src.len(), |g, nc| match src[nc] {
        UnfoldSrc::Text(c) => model.entry(members[g][0], c).clone(),
        UnfoldSrc::Lift(c, j) => model.entry(members[g][j], c).clone(),
    });
    finish(model, Axis::Col, new_cols, new_rows, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::{flat, regional_sales, regional_sales_stacked};
    use crate::locator::{leaf_sequences, resolve_locator, seq, Locator};

    #[test]
    fn fold_seasons_into_rows() {
        let m = regional_sales_stacked();
        let f = fold(&m, 2).unwrap();
        assert_eq!(f.shape(), (16, 3));
        let cols: Vec<String> = leaf_sequences(f.col_axis()).iter().map(|s| s.to_string()).collect();
        assert_eq!(cols, ["(season)", "(2020)", "(2021)"]);
        assert_eq!(f.col_axis().level_names(), ["year"]);
        assert_eq!(f.row_axis().level_names(), ["continent", "country", "city", "season"]);
        let b = resolve_locator(
            &f,
            &Locator::single(seq(&["Asia", "CHN", "SHA", "spr"])),
            &Locator::single(seq(&["2020"])),
        )
        .unwrap();
        assert_eq!(f.entry(b.row_start, 1), &Value::Number(131.0));
        assert_eq!(f.entry(b.row_start, 0), &Value::Text("spr".into()));
        assert_eq!(f.entry(b.row_start + 1, 0), &Value::Text("aut".into()));
    }

    #[test]
    fn fold_matches_a_melt_oracle() {
        let m = regional_sales_stacked();
        let f = fold(&m, 1).unwrap();
        assert_eq!(f.shape(), (16, 3));
        let years = ["2020", "2021"];
        for r in 0..8 {
            for (j, y) in years.iter().enumerate() {
                let nr = r * 2 + j;
                assert_eq!(f.entry(nr, 0), &Value::Text((*y).into()));
                for s in 0..2 {
                    assert_eq!(f.entry(nr, 1 + s), m.entry(r, j * 2 + s));
                }
            }
        }
    }

    #[test]
    fn folding_twice_leaves_one_value_column() {
        let m = regional_sales_stacked();
        let once = fold(&m, 1).unwrap();
        let twice = fold(&once, 1).unwrap();
        assert_eq!(twice.shape(), (32, 3));
        let cols: Vec<String> = leaf_sequences(twice.col_axis()).iter().map(|s| s.to_string()).collect();
        assert_eq!(cols, ["(season)", "(year)", "(value)"]);
        assert_eq!(twice.col_axis().level_names(), ["value"]);
        assert_eq!(twice.entry(0, 0), &Value::Text("spr".into()));
        assert_eq!(twice.entry(0, 1), &Value::Text("2020".into()));
        assert_eq!(twice.entry(0, 2), &Value::Number(102.0));
        assert_eq!(twice.entry(3, 2), &Value::Number(95.0));
    }

    #[test]
    fn unfold_inverts_fold() {
        let m = regional_sales_stacked();
        let f = fold(&m, 2).unwrap();
        assert!(unfold(&f, 0, 1).unwrap().same_content(&m));

        let once = fold(&m, 1).unwrap();
        let twice = fold(&once, 1).unwrap();
        assert!(unfold(&twice, 0, 2).unwrap().same_content(&once));

        let flat1 = flat(&["a", "b"], &["x", "y", "z"], vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]);
        let ff = fold(&flat1, 1).unwrap();
        assert_eq!(ff.shape(), (6, 2));
        assert!(unfold(&ff, 0, 1).unwrap().same_content(&flat1));
    }

    #[test]
    fn fold_errors() {
        assert_eq!(fold(&regional_sales(), 2).unwrap_err().code(), "DerivedPresent");
        let m = regional_sales_stacked();
        let t = crate::transform::transpose_table(&m);
        assert_eq!(fold(&t, 2).unwrap_err().code(), "NotUniform");
    }

    #[test]
    fn unfold_errors() {
        let m = regional_sales_stacked();
        let f = fold(&m, 2).unwrap();
        assert_eq!(unfold(&f, 1, 2).unwrap_err().code(), "NotCategorical");
        assert_eq!(unfold(&f, 0, 0).unwrap_err().code(), "InvalidParameter");

        // Two rows sharing everything but the value, with the same key.
        let rows = HeadingAxis::with_default_names(
            vec![
                HeadingNode::leaf(Label::plain("a")),
                HeadingNode::leaf(Label::plain("b")),
            ],
            Axis::Row,
        )
        .unwrap();
        let cols = HeadingAxis::with_default_names(
            vec![
                HeadingNode::leaf(Label::plain("k")),
                HeadingNode::leaf(Label::plain("v")),
            ],
            Axis::Col,
        )
        .unwrap();
        let dup = TableModel::new(
            rows,
            cols,
            Matrix::from_rows(vec![
                vec![Value::Text("x".into()), Value::Number(1.0)],
                vec![Value::Text("x".into()), Value::Number(2.0)],
            ])
            .unwrap(),
        )
        .unwrap();
        assert_eq!(unfold(&dup, 0, 1).unwrap_err().code(), "IrregularGroups");
        assert_eq!(unfold(&dup, 1, 0).unwrap_err().code(), "NotCategorical");
    }

    #[test]
    fn unfold_flat_pivot() {
        // rows r1..r4 with columns (id, key, v): a pivot to one row per id.
        let rows = HeadingAxis::with_default_names(
            (1..=4).map(|i| HeadingNode::leaf(Label::plain(format!("r{i}")))).collect(),
            Axis::Row,
        )
        .unwrap();
        let cols = HeadingAxis::new(
            ["id", "key", "v"].iter().map(|n| HeadingNode::leaf(Label::plain(*n))).collect(),
            vec!["field".into()],
        )
        .unwrap();
        let t = |s: &str| Value::Text(s.into());
        let entries = Matrix::from_rows(vec![
            vec![t("p"), t("lo"), Value::Number(1.0)],
            vec![t("p"), t("hi"), Value::Number(2.0)],
            vec![t("q"), t("lo"), Value::Number(3.0)],
            vec![t("q"), t("hi"), Value::Missing],
        ])
        .unwrap();
        let m = TableModel::new(rows, cols, entries).unwrap();
        let u = unfold(&m, 1, 2).unwrap();
        assert_eq!(u.shape(), (2, 3));
        let leaves: Vec<String> = leaf_sequences(u.col_axis()).iter().map(|s| s.to_string()).collect();
        assert_eq!(leaves, ["(id, id)", "(v, lo)", "(v, hi)"]);
        assert_eq!(u.col_axis().level_names(), ["field", "key"]);
        assert_eq!(u.entry(1, 0), &t("q"));
        assert_eq!(u.entry(1, 1), &Value::Number(3.0));
        assert_eq!(u.entry(1, 2), &Value::Missing);
    }
}
