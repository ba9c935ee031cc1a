//! Proptest strategies for random hierarchical tables, plus brute-force oracles.

use std::collections::BTreeMap;

use proptest::prelude::*;

use crate::locator::Block;
use crate::model::{Axis, HeadingAxis, HeadingNode, Label, Matrix, Stat, TableModel, Value};

/// Shape of one level: whether every parent gets the same children, and child counts.
#[derive(Debug, Clone)]
struct LevelPlan {
    uniform: bool,
    counts: Vec<usize>,
}

fn level_plan() -> impl Strategy<Value = LevelPlan> {
    (any::<bool>(), prop::collection::vec(1usize..=3, 8)).prop_map(|(uniform, counts)| LevelPlan { uniform, counts })
}

fn build_axis(kind: Axis, roots: usize, plans: &[LevelPlan], max_leaves: usize) -> HeadingAxis {
    let prefix = match kind {
        Axis::Row => 'r',
        Axis::Col => 'c',
    };
    let depth = plans.len() + 1;
    // Count of nodes at each level, capped so the leaf total stays within bounds.
    let mut counts_per_level: Vec<Vec<usize>> = Vec::new();
    let mut width = roots.min(max_leaves).max(1);
    for plan in plans {
        let mut per_parent = Vec::with_capacity(width);
        let mut budget = max_leaves;
        for j in 0..width {
            let want = if plan.uniform {
                plan.counts[0]
            } else {
                plan.counts[j % plan.counts.len()]
            };
            let reserve = width - j - 1;
            let n = want.min(budget.saturating_sub(reserve)).max(1);
            budget -= n;
            per_parent.push(n);
        }
        // A capped uniform level would silently become non-uniform; keep it uniform instead.
        if plan.uniform {
            let n = *per_parent.iter().min().unwrap();
            per_parent.iter_mut().for_each(|c| *c = n);
        }
        width = per_parent.iter().sum();
        counts_per_level.push(per_parent);
    }

    fn grow(
        level: usize,
        parent_index: usize,
        counts_per_level: &[Vec<usize>],
        plans: &[LevelPlan],
        prefix: char,
        next_index: &mut [usize],
        serial: &mut usize,
    ) -> Vec<HeadingNode> {
        if level > counts_per_level.len() {
            return Vec::new();
        }
        let n = counts_per_level[level - 1][parent_index];
        let uniform = plans[level - 1].uniform;
        (0..n)
            .map(|k| {
                let name = if uniform {
                    format!("{prefix}{}-{k}", level + 1)
                } else {
                    *serial += 1;
                    format!("{prefix}{}-{k}.{}", level + 1, serial)
                };
                let me = next_index[level - 1];
                next_index[level - 1] += 1;
                let children = grow(level + 1, me, counts_per_level, plans, prefix, next_index, serial);
                HeadingNode::new(Label::plain(name), children)
            })
            .collect()
    }

    let mut next_index = vec![0; plans.len()];
    let mut serial = 0;
    let roots: Vec<HeadingNode> = (0..roots.min(max_leaves).max(1))
        .map(|k| {
            let children = grow(1, k, &counts_per_level, plans, prefix, &mut next_index, &mut serial);
            HeadingNode::new(Label::plain(format!("{prefix}1-{k}")), children)
        })
        .collect();
    HeadingAxis::new(roots, kind.default_level_names(depth)).expect("generated axis is valid")
}

/// A random heading axis with `1..=max_depth` levels and at most `max_leaves` leaves.
pub fn arb_axis(kind: Axis, max_depth: usize, max_leaves: usize) -> impl Strategy<Value = HeadingAxis> {
    (1usize..=4, prop::collection::vec(level_plan(), 0..max_depth))
        .prop_map(move |(roots, plans)| build_axis(kind, roots, &plans, max_leaves))
}

fn cell_value() -> impl Strategy<Value = Value> {
    prop_oneof![
        9 => (-1000i32..1000).prop_map(|x| Value::Number(x as f64)),
        1 => Just(Value::Missing),
    ]
}

/// A random numeric table: up to `max_depth` levels and `max_leaves` leaves per axis.
pub fn arb_table(max_depth: usize, max_leaves: usize) -> impl Strategy<Value = TableModel> {
    (
        arb_axis(Axis::Row, max_depth, max_leaves),
        arb_axis(Axis::Col, max_depth, max_leaves),
    )
        .prop_flat_map(|(r, c)| {
            let n = r.leaf_count() * c.leaf_count();
            let cols = c.leaf_count();
            (
                Just(r),
                Just(c),
                prop::collection::vec(cell_value(), n).prop_map(move |v| (cols, v)),
            )
        })
        .prop_map(|(r, c, (cols, values))| {
            let rows = values.len() / cols;
            TableModel::new(r, c, Matrix::from_vec(rows, cols, values).unwrap()).expect("generated table is valid")
        })
}

/// A random table plus a random block inside it.
pub fn arb_table_and_block(max_depth: usize, max_leaves: usize) -> impl Strategy<Value = (TableModel, Block)> {
    arb_table(max_depth, max_leaves).prop_flat_map(|m| {
        let (rows, cols) = m.shape();
        let range = |n: usize| (0..n).prop_flat_map(move |s| (Just(s), s + 1..=n));
        (Just(m), range(rows), range(cols))
            .prop_map(|(m, (r0, r1), (c0, c1))| (m, Block::new(r0..r1, c0..c1)))
    })
}

/// One coordinate component: (axis, level name, label name, derived).
pub type CoordPart = (Axis, String, String, bool);

/// Every entry keyed by the full set of labels that address it.
/// Level identity is the level name, which is unique per table in generated models.
pub fn coordinates(model: &TableModel) -> BTreeMap<Vec<CoordPart>, Vec<String>> {
    let paths = |axis: Axis| {
        let h = model.axis(axis);
        let mut out = Vec::new();
        h.for_each_leaf_path(|p| {
            out.push(
                p.iter()
                    .enumerate()
                    .map(|(i, n)| (axis, h.level_names()[i].clone(), n.label.name.clone(), n.label.is_derived()))
                    .collect::<Vec<_>>(),
            )
        });
        out
    };
    let rows = paths(Axis::Row);
    let cols = paths(Axis::Col);
    let mut out: BTreeMap<Vec<CoordPart>, Vec<String>> = BTreeMap::new();
    for (r, rp) in rows.iter().enumerate() {
        for (c, cp) in cols.iter().enumerate() {
            // Axis does not matter for identity: transposes move levels across axes.
            let mut key: Vec<CoordPart> = rp.iter().chain(cp).cloned().map(|(_, l, n, d)| (Axis::Row, l, n, d)).collect();
            key.sort();
            out.entry(key).or_default().push(value_key(model.entry(r, c)));
        }
    }
    for v in out.values_mut() {
        v.sort();
    }
    out
}

/// Canonical text form of a value for multiset comparisons.
pub fn value_key(v: &Value) -> String {
    match v {
        Value::Number(x) => format!("n:{x}"),
        Value::Text(t) => format!("t:{t}"),
        Value::Missing => "missing".to_string(),
    }
}

/// A uniform table whose axes branch by the given factors per level; entry (r, c) = r * cols + c.
pub fn uniform_table(row_branching: &[usize], col_branching: &[usize]) -> TableModel {
    fn forest(kind: Axis, branching: &[usize], level: usize) -> Vec<HeadingNode> {
        let Some((&n, rest)) = branching.split_first() else {
            return Vec::new();
        };
        let p = match kind {
            Axis::Row => 'r',
            Axis::Col => 'c',
        };
        (0..n)
            .map(|k| HeadingNode::new(Label::plain(format!("{p}{level}-{k}")), forest(kind, rest, level + 1)))
            .collect()
    }
    let r = HeadingAxis::with_default_names(forest(Axis::Row, row_branching, 1), Axis::Row).expect("row axis");
    let c = HeadingAxis::with_default_names(forest(Axis::Col, col_branching, 1), Axis::Col).expect("col axis");
    let (rows, cols) = (r.leaf_count(), c.leaf_count());
    let m = Matrix::from_fn(rows, cols, |i, j| Value::Number((i * cols + j) as f64));
    TableModel::new(r, c, m).expect("uniform table")
}

/// How many times each law was exercised on one table.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LawCounts {
    pub swap: usize,
    pub transpose_table: usize,
    pub transpose_level: usize,
    pub linear: usize,
    pub fold: usize,
}

impl std::ops::AddAssign for LawCounts {
    fn add_assign(&mut self, o: Self) {
        self.swap += o.swap;
        self.transpose_table += o.transpose_table;
        self.transpose_level += o.transpose_level;
        self.linear += o.linear;
        self.fold += o.fold;
    }
}

fn numeric_coordinates(model: &TableModel) -> BTreeMap<Vec<CoordPart>, Vec<String>> {
    let mut c = coordinates(model);
    c.retain(|_, v| {
        v.retain(|x| !x.starts_with("t:"));
        !v.is_empty()
    });
    c
}

fn conserved(op: &str, a: &TableModel, b: &TableModel) -> Result<(), String> {
    if coordinates(a) != coordinates(b) {
        return Err(format!("{op} does not conserve (coordinate, value) pairs"));
    }
    Ok(())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Checks every operator law that applies to `m`: involutions, inverse pairs,
/// shape laws and value conservation.
pub fn check_laws(m: &TableModel) -> Result<LawCounts, String> {
    use crate::structure::detect_structure;
    use crate::transform::{fold, swap, to_linear, to_stacked, transpose_level, transpose_table, unfold};

    let mut n = LawCounts::default();
    let (rows, cols) = m.shape();

    for axis in [Axis::Row, Axis::Col] {
        let h = m.axis(axis);
        let structure = detect_structure(h);
        for i in 1..h.depth() {
            match swap(m, axis, i) {
                Ok(s) => {
                    ensure(s.version() == m.version() + 1, || "swap must bump the version".into())?;
                    conserved("swap", m, &s)?;
                    let back = swap(&s, axis, i).map_err(|e| format!("swap back failed: {e}"))?;
                    ensure(back.same_content(m), || format!("swap({axis},{i}) twice is not the identity"))?;
                    n.swap += 1;
                }
                Err(e) => {
                    ensure(!structure.boundary_uniform(i), || format!("swap on a uniform boundary failed: {e}"))?;
                    ensure(e.code() == "NotUniform", || format!("unexpected swap error {e}"))?;
                }
            }
        }
    }

    let t = transpose_table(m);
    conserved("transpose_table", m, &t)?;
    ensure(t.shape() == (cols, rows), || "transpose_table shape".into())?;
    ensure(transpose_table(&t).same_content(m), || "transpose_table twice is not the identity".into())?;
    n.transpose_table += 1;

    for source in [Axis::Row, Axis::Col] {
        let depth = m.axis(source).depth();
        for level in 1..=depth {
            match transpose_level(m, source, level) {
                Ok(t) => {
                    conserved("transpose_level", m, &t)?;
                    let k = t.axis(source.other()).depth();
                    let labels = m.axis(source).nodes_at_level(level).len();
                    let parents = if level == 1 { 1 } else { m.axis(source).nodes_at_level(level - 1).len() };
                    let per = labels / parents;
                    let (r2, c2) = t.shape();
                    let want = match source {
                        Axis::Col => (rows * per, cols / per),
                        Axis::Row => (rows / per, cols * per),
                    };
                    ensure((r2, c2) == want, || format!("transpose_level shape {:?} != {want:?}", (r2, c2)))?;
                    let back = transpose_level(&t, source.other(), k)
                        .map_err(|e| format!("moving the level back failed: {e}"))?;
                    conserved("transpose_level back", m, &back)?;
                    n.transpose_level += 1;
                }
                Err(e) => ensure(matches!(e.code(), "NotUniform" | "LastLevel"), || {
                    format!("unexpected transpose_level error {e}")
                })?,
            }
        }
    }

    let stats = [Stat::Sum, Stat::Avg, Stat::Min, Stat::Max];
    for axis in [Axis::Row, Axis::Col] {
        let h = m.axis(axis);
        for level in 1..h.depth() {
            let stat = stats[(level + axis as usize) % stats.len()];
            let lin = to_linear(m, axis, level, stat).map_err(|e| format!("to_linear({axis},{level}) failed: {e}"))?;
            let added = h.nodes_at_level(level).len();
            let grow = lin.axis(axis).leaf_count() - h.leaf_count();
            ensure(grow == added, || format!("to_linear added {grow} slices, expected {added}"))?;
            let before = coordinates(m);
            let after = coordinates(&lin);
            for (k, v) in &before {
                ensure(after.get(k) == Some(v), || "to_linear lost an entry".into())?;
            }
            for k in after.keys().filter(|k| !before.contains_key(*k)) {
                ensure(k.iter().any(|p| p.3), || "to_linear added a non-derived coordinate".into())?;
            }
            let back = to_stacked(&lin, axis, level).map_err(|e| format!("to_stacked failed: {e}"))?;
            ensure(back.same_content(m), || "to_stacked after to_linear is not the identity".into())?;
            n.linear += 1;
        }
    }

    let c = m.col_axis();
    let structure = detect_structure(c);
    for level in 1..=c.depth() {
        match fold(m, level) {
            Ok(f) => {
                let parents = if level == 1 { 1 } else { c.nodes_at_level(level - 1).len() };
                let k = c.nodes_at_level(level).len() / parents;
                let want = (rows * k, cols / k + 1);
                ensure(f.shape() == want, || format!("fold shape {:?} != {want:?}", f.shape()))?;
                let mut folded = numeric_coordinates(&f);
                if c.depth() == 1 {
                    // The lone value column adds a constant component.
                    folded = folded
                        .into_iter()
                        .map(|(mut k, v)| {
                            k.retain(|p| p.1 != crate::transform::VALUE_COLUMN);
                            (k, v)
                        })
                        .collect();
                }
                ensure(folded == numeric_coordinates(m), || "fold does not conserve values".into())?;
                let u = unfold(&f, 0, 1).map_err(|e| format!("unfold after fold({level}) failed: {e}"))?;
                if level == c.depth() {
                    ensure(u.same_content(m), || format!("unfold after fold({level}) is not the identity"))?;
                } else {
                    ensure(coordinates(&u) == coordinates(m), || "unfold after fold does not restore values".into())?;
                }
                n.fold += 1;
            }
            Err(e) => {
                // Removal needs identical subtrees under every label of the level.
                let removable = structure.bicluster_from.is_some_and(|k| k <= level);
                ensure(!removable, || format!("fold on a uniform level failed: {e}"))?;
                ensure(e.code() == "NotUniform", || format!("unexpected fold error {e}"))?;
            }
        }
    }
    Ok(n)
}

/// `resolve_locator(locator_of(b)) == b`.
pub fn check_locator_round_trip(m: &TableModel, b: Block) -> Result<(), String> {
    use crate::locator::{locator_of, resolve_locator};
    let (r, c) = locator_of(m, &b).map_err(|e| e.to_string())?;
    let back = resolve_locator(m, &r, &c).map_err(|e| format!("{r} x {c}: {e}"))?;
    ensure(back == b, || format!("{b:?} came back as {back:?}"))
}
