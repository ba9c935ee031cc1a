//! Swap and transpose: reordering levels within an axis and moving them between axes.

use crate::model::{Axis, HeadingAxis, HeadingNode, Label, Matrix, TableModel};

use super::{append_level, check_level, finish, select_along, TransformError};

/// Exchanges levels `upper_level` and `upper_level + 1` of `axis`.
///
/// Within each parent above the pair, every `upper_level` node must carry the same
/// ordered list of child names.
pub fn swap(model: &TableModel, axis: Axis, upper_level: usize) -> Result<TableModel, TransformError> {
    let heading = model.axis(axis);
    let depth = heading.depth();
    if depth < 2 {
        return Err(TransformError::InvalidParameter(format!(
            "{axis} headings have a single level"
        )));
    }
    check_level(axis, upper_level, depth - 1)?;
    let mut perm = Vec::with_capacity(heading.leaf_count());
    let roots = swap_siblings(heading.roots(), 1, upper_level, 0, &mut perm).map_err(|detail| {
        TransformError::NotUniform {
            axis,
            level: upper_level,
            detail,
        }
    })?;
    let mut names = heading.level_names().to_vec();
    names.swap(upper_level - 1, upper_level);
    let swapped = HeadingAxis::from_parts_unchecked(roots, depth, names);
    let entries = select_along(model.entries(), axis, &perm);
    finish(model, axis, swapped, model.axis(axis.other()).clone(), entries)
}

fn swap_siblings(
    nodes: &[HeadingNode],
    level: usize,
    upper: usize,
    offset: usize,
    perm: &mut Vec<usize>,
) -> Result<Vec<HeadingNode>, String> {
    if level < upper {
        let mut off = offset;
        let mut out = Vec::with_capacity(nodes.len());
        for n in nodes {
            let children = swap_siblings(&n.children, level + 1, upper, off, perm)?;
            out.push(HeadingNode::new(n.label.clone(), children));
            off += n.leaf_count();
        }
        return Ok(out);
    }
    let first = &nodes[0];
    for a in &nodes[1..] {
        if !a.children.iter().map(HeadingNode::name).eq(first.children.iter().map(HeadingNode::name)) {
            return Err(format!(
                "{:?} and {:?} have different children",
                first.name(),
                a.name()
            ));
        }
    }
    let mut starts = Vec::with_capacity(nodes.len());
    let mut off = offset;
    for a in nodes {
        let mut row = Vec::with_capacity(a.children.len());
        for b in &a.children {
            let n = b.leaf_count();
            row.push((off, n));
            off += n;
        }
        starts.push(row);
    }
    let mut out = Vec::with_capacity(first.children.len());
    for (s, b) in first.children.iter().enumerate() {
        let mut inner = Vec::with_capacity(nodes.len());
        for (r, a) in nodes.iter().enumerate() {
            let (start, n) = starts[r][s];
            perm.extend(start..start + n);
            inner.push(HeadingNode::new(a.label.clone(), a.children[s].children.clone()));
        }
        out.push(HeadingNode::new(b.label.clone(), inner));
    }
    Ok(out)
}

/// Result of cutting one level out of a forest.
pub(super) struct Removed {
    pub roots: Vec<HeadingNode>,
    /// The labels of the removed level, identical under every parent.
    pub labels: Vec<Label>,
    /// For each old leaf: (new leaf index, position of its removed label).
    pub map: Vec<(usize, usize)>,
}

/// Removes 1-based `level` from the forest `roots`. Every parent of that level must hold
/// the same label list, and the subtrees under those labels must match in shape.
pub(super) fn remove_level(roots: &[HeadingNode], level: usize) -> Result<Removed, String> {
    struct Cut {
        target: usize,
        labels: Option<Vec<Label>>,
        map: Vec<(usize, usize)>,
        new_leaves: usize,
    }
    fn walk(nodes: &[HeadingNode], level: usize, cut: &mut Cut) -> Result<Vec<HeadingNode>, String> {
        if level < cut.target {
            let mut out = Vec::with_capacity(nodes.len());
            for n in nodes {
                out.push(HeadingNode::new(n.label.clone(), walk(&n.children, level + 1, cut)?));
            }
            return Ok(out);
        }
        let these: Vec<Label> = nodes.iter().map(|n| n.label.clone()).collect();
        match &cut.labels {
            None => cut.labels = Some(these),
            Some(l) if *l != these => {
                return Err(format!(
                    "label lists differ: [{}] vs [{}]",
                    names(l),
                    names(&these)
                ))
            }
            Some(_) => {}
        }
        let first = &nodes[0];
        for c in &nodes[1..] {
            let same = c.children.len() == first.children.len()
                && c.children.iter().zip(&first.children).all(|(a, b)| a.same_shape(b));
            if !same {
                return Err(format!(
                    "subtrees under {:?} and {:?} differ",
                    first.name(),
                    c.name()
                ));
            }
        }
        let m = first.leaf_count();
        for j in 0..nodes.len() {
            for t in 0..m {
                cut.map.push((cut.new_leaves + t, j));
            }
        }
        cut.new_leaves += m;
        Ok(first.children.clone())
    }
    let mut cut = Cut {
        target: level,
        labels: None,
        map: Vec::new(),
        new_leaves: 0,
    };
    let roots = walk(roots, 1, &mut cut)?;
    Ok(Removed {
        roots,
        labels: cut.labels.unwrap_or_default(),
        map: cut.map,
    })
}

fn names(labels: &[Label]) -> String {
    labels.iter().map(|l| l.name.as_str()).collect::<Vec<_>>().join(", ")
}

/// Moves `level` of `source` to the bottom of the other axis.
pub fn transpose_level(model: &TableModel, source: Axis, level: usize) -> Result<TableModel, TransformError> {
    let heading = model.axis(source);
    let depth = heading.depth();
    check_level(source, level, depth)?;
    if depth == 1 {
        return Err(TransformError::LastLevel { axis: source });
    }
    let Removed { roots, labels, map } = remove_level(heading.roots(), level)
        .map_err(|detail| TransformError::NotUniform {
            axis: source,
            level,
            detail,
        })?;
    let k = labels.len();
    let mut names = heading.level_names().to_vec();
    let moved = names.remove(level - 1);
    let reduced = HeadingAxis::from_parts_unchecked(roots, depth - 1, names);
    let target = append_level(model.axis(source.other()), &labels, moved);

    let mut inv = vec![0; map.len()];
    for (old, &(new, j)) in map.iter().enumerate() {
        inv[new * k + j] = old;
    }
    let reduced_len = map.len() / k;
    let e = model.entries();
    let entries = match source {
        Axis::Col => Matrix::from_fn(e.rows() * k, reduced_len, |nr, nc| {
            e.get(nr / k, inv[nc * k + nr % k]).clone()
        }),
        Axis::Row => Matrix::from_fn(reduced_len, e.cols() * k, |nr, nc| {
            e.get(inv[nr * k + nc % k], nc / k).clone()
        }),
    };
    finish(model, source, reduced, target, entries)
}

/// Exchanges the row and column headings and transposes the entries.
pub fn transpose_table(model: &TableModel) -> TableModel {
    let (rows, cols, entries) = model.clone().into_parts();
    TableModel::new(cols, rows, entries.transposed())
        .expect("transposing a valid model keeps it valid")
        .with_version(model.version() + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::{flat, regional_sales};
    use crate::locator::{leaf_sequences, resolve_locator, seq, Locator};
    use crate::model::Value;

    fn col_leaves(m: &TableModel) -> Vec<String> {
        leaf_sequences(m.col_axis()).iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn swap_fixture_columns() {
        let m = regional_sales();
        let s = swap(&m, Axis::Col, 1).unwrap();
        assert_eq!(
            col_leaves(&s),
            ["(&, 2020)", "(&, 2021)", "(spr, 2020)", "(spr, 2021)", "(aut, 2020)", "(aut, 2021)"]
        );
        assert_eq!(m.entry(1, 1), &Value::Number(131.0));
        assert_eq!(s.entry(1, 2), &Value::Number(131.0));
        assert_eq!(s.col_axis().level_names(), ["season", "year"]);
        assert_eq!(s.version(), 2);
    }

    #[test]
    fn swap_entries_follow_an_independent_permutation() {
        let m = regional_sales();
        let s = swap(&m, Axis::Col, 1).unwrap();
        let old = leaf_sequences(m.col_axis());
        let new = leaf_sequences(s.col_axis());
        for (nc, sq) in new.iter().enumerate() {
            let l = sq.labels();
            let oc = old
                .iter()
                .position(|o| o.labels()[0] == l[1] && o.labels()[1] == l[0])
                .unwrap();
            for r in 0..8 {
                assert_eq!(s.entry(r, nc), m.entry(r, oc));
            }
        }
    }

    #[test]
    fn swap_twice_is_identity() {
        let m = regional_sales();
        let back = swap(&swap(&m, Axis::Col, 1).unwrap(), Axis::Col, 1).unwrap();
        assert!(back.same_content(&m));
    }

    #[test]
    fn swap_non_uniform_rows() {
        let m = regional_sales();
        let err = swap(&m, Axis::Row, 2).unwrap_err();
        assert_eq!(err.code(), "NotUniform");
        assert_eq!(swap(&m, Axis::Row, 1).unwrap_err().code(), "NotUniform");
        assert_eq!(swap(&m, Axis::Row, 3).unwrap_err().code(), "InvalidParameter");
    }

    #[test]
    fn transpose_column_level_two_to_rows() {
        let m = regional_sales();
        let t = transpose_level(&m, Axis::Col, 2).unwrap();
        assert_eq!(t.shape(), (24, 2));
        assert_eq!(col_leaves(&t), ["(2020)", "(2021)"]);
        assert_eq!(t.row_axis().level_names(), ["continent", "country", "city", "season"]);
        let b = resolve_locator(
            &t,
            &Locator::single(seq(&["Asia", "CHN", "SHA", "spr"])),
            &Locator::single(seq(&["2020"])),
        )
        .unwrap();
        assert_eq!(t.entry(b.row_start, b.col_start), &Value::Number(131.0));
    }

    #[test]
    fn transpose_level_back_returns_to_bottom() {
        let m = regional_sales();
        let t = transpose_level(&m, Axis::Col, 1).unwrap();
        assert_eq!(t.shape(), (16, 3));
        let back = transpose_level(&t, Axis::Row, 4).unwrap();
        assert_eq!(back.shape(), (8, 6));
        assert_eq!(back.col_axis().level_names(), ["season", "year"]);
        assert!(back.same_content(&swap(&m, Axis::Col, 1).unwrap()));
    }

    #[test]
    fn transpose_needs_matching_subtrees() {
        let m = regional_sales();
        assert_eq!(transpose_level(&m, Axis::Row, 2).unwrap_err().code(), "NotUniform");
        assert_eq!(transpose_level(&m, Axis::Row, 3).unwrap_err().code(), "NotUniform");
        let f = flat(&["a"], &["x", "y"], vec![vec![1.0, 2.0]]);
        assert_eq!(transpose_level(&f, Axis::Col, 1).unwrap_err().code(), "LastLevel");
    }

    #[test]
    fn transpose_table_moves_values() {
        let m = regional_sales();
        let t = transpose_table(&m);
        assert_eq!(t.shape(), (6, 8));
        assert_eq!(t.entry(1, 1), &Value::Number(131.0));
        assert!(transpose_table(&t).same_content(&m));
        let one = flat(&["a"], &["b"], vec![vec![1.0]]);
        assert_eq!(transpose_table(&one).shape(), (1, 1));
    }
}
