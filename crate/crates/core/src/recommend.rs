//! Recommending table units related to a reference unit.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::locator::{AxisIndex, Block, Locator, LocatorError, TableUnit};
use crate::model::{Axis, NodeId, TableModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mechanism {
    #[serde(alias = "topo")]
    Topology,
    Name,
}

impl std::str::FromStr for Mechanism {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "topology" | "topo" => Ok(Mechanism::Topology),
            "name" => Ok(Mechanism::Name),
            other => Err(format!("unknown mechanism {other:?}, expected topology or name")),
        }
    }
}

/// The last non-wildcard label of every sequence in a locator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Descriptor {
    pub axis: Axis,
    pub nodes: Vec<NodeId>,
    pub names: Vec<String>,
    /// Level of the first label; recommendation requires a single label anyway.
    pub level: usize,
}

impl Descriptor {
    pub fn is_single(&self) -> bool {
        self.nodes.len() == 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PriorityPair {
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recommendation {
    pub unit: TableUnit,
    pub priority: PriorityPair,
}

/// Inclusive priority interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriorityRange {
    pub lo: usize,
    pub hi: usize,
}

impl PriorityRange {
    pub fn new(lo: usize, hi: usize) -> Self {
        PriorityRange { lo, hi }
    }

    pub fn full() -> Self {
        PriorityRange { lo: 0, hi: usize::MAX }
    }

    pub fn contains(&self, p: usize) -> bool {
        self.lo <= p && p <= self.hi
    }
}

impl From<RangeInclusive<usize>> for PriorityRange {
    fn from(r: RangeInclusive<usize>) -> Self {
        PriorityRange::new(*r.start(), *r.end())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecommendError {
    #[error("no recommendation: {0}")]
    NoRecommendation(String),
    #[error("descriptors sit at levels {reference} and {candidate}")]
    LevelMismatch { reference: usize, candidate: usize },
    #[error(transparent)]
    Locator(#[from] LocatorError),
}

impl RecommendError {
    pub fn code(&self) -> &'static str {
        match self {
            RecommendError::NoRecommendation(_) => "NoRecommendation",
            RecommendError::LevelMismatch { .. } => "LevelMismatch",
            RecommendError::Locator(e) => e.code(),
        }
    }
}

pub fn descriptor_of(index: &AxisIndex<'_>, locator: &Locator) -> Result<Descriptor, RecommendError> {
    if locator.sequences.is_empty() {
        return Err(LocatorError::EmptyLocator { axis: index.axis() }.into());
    }
    let mut nodes = Vec::new();
    let mut names = Vec::new();
    let mut level = 0;
    for s in &locator.sequences {
        let i = index.sequence_node(s)?;
        if nodes.is_empty() {
            level = index.level(i);
        }
        nodes.push(index.node(i).id);
        names.push(index.node(i).name().to_string());
    }
    Ok(Descriptor {
        axis: index.axis(),
        nodes,
        names,
        level,
    })
}

fn single_node(index: &AxisIndex<'_>, d: &Descriptor) -> Result<usize, RecommendError> {
    match d.nodes.as_slice() {
        [id] => index
            .index_of(*id)
            .ok_or_else(|| RecommendError::NoRecommendation(format!("{} is not on this axis", d.names[0]))),
        _ => Err(RecommendError::NoRecommendation(format!(
            "{} descriptor has {} labels, not one",
            d.axis,
            d.nodes.len()
        ))),
    }
}

fn same_level(index: &AxisIndex<'_>, a: usize, b: usize) -> Result<(), RecommendError> {
    let (la, lb) = (index.level(a), index.level(b));
    if la != lb {
        return Err(RecommendError::LevelMismatch {
            reference: la,
            candidate: lb,
        });
    }
    Ok(())
}

/// Reference level minus the level of the lowest common ancestor (0 when there is none).
fn topo_nodes(index: &AxisIndex<'_>, reference: usize, cand: usize) -> usize {
    let level = index.level(reference);
    let (mut a, mut b) = (Some(reference), Some(cand));
    while let (Some(x), Some(y)) = (a, b) {
        if x == y {
            return level - index.level(x);
        }
        a = index.parent(x);
        b = index.parent(y);
    }
    level
}

fn name_nodes(index: &AxisIndex<'_>, reference: usize, cand: usize) -> usize {
    if reference == cand {
        0
    } else if index.node(reference).name() == index.node(cand).name() {
        1
    } else {
        2
    }
}

pub fn topo_priority(index: &AxisIndex<'_>, reference: &Descriptor, cand: &Descriptor) -> Result<usize, RecommendError> {
    let (r, c) = (single_node(index, reference)?, single_node(index, cand)?);
    same_level(index, r, c)?;
    Ok(topo_nodes(index, r, c))
}

pub fn name_priority(index: &AxisIndex<'_>, reference: &Descriptor, cand: &Descriptor) -> Result<usize, RecommendError> {
    let (r, c) = (single_node(index, reference)?, single_node(index, cand)?);
    same_level(index, r, c)?;
    Ok(name_nodes(index, r, c))
}

/// Same-level nodes whose subtree has as many leaves as the reference, with priorities.
fn axis_candidates(
    index: &AxisIndex<'_>,
    locator: &Locator,
    mechanism: Mechanism,
) -> Result<Vec<(std::ops::Range<usize>, usize)>, RecommendError> {
    let d = descriptor_of(index, locator)?;
    if !d.is_single() {
        return Err(RecommendError::NoRecommendation(format!(
            "the {} selection is not within a single subtree",
            index.axis()
        )));
    }
    let r = single_node(index, &d)?;
    let extent = index.leaf_range(r).len();
    Ok(index
        .at_level(index.level(r))
        .filter(|&c| index.leaf_range(c).len() == extent)
        .map(|c| {
            let p = match mechanism {
                Mechanism::Topology => topo_nodes(index, r, c),
                Mechanism::Name => name_nodes(index, r, c),
            };
            (index.leaf_range(c), p)
        })
        .collect())
}

/// Every unit congruent to `unit` built from same-level subtrees, with its priorities.
/// Sorted by row priority, column priority, then presentation order.
pub fn enumerate_candidates(
    model: &TableModel,
    unit: &TableUnit,
    mechanism: Mechanism,
) -> Result<Vec<Recommendation>, RecommendError> {
    let rows = axis_candidates(&AxisIndex::new(model, Axis::Row), &unit.row_locator, mechanism)?;
    let cols = axis_candidates(&AxisIndex::new(model, Axis::Col), &unit.col_locator, mechanism)?;
    let mut out = Vec::with_capacity(rows.len() * cols.len());
    for (rr, rp) in &rows {
        for (cr, cp) in &cols {
            let block = Block::new(rr.clone(), cr.clone());
            out.push(Recommendation {
                unit: TableUnit::from_block(model, block)?,
                priority: PriorityPair { row: *rp, col: *cp },
            });
        }
    }
    out.sort_by_key(|r| (r.priority, r.unit.block.row_start, r.unit.block.col_start));
    Ok(out)
}

pub fn recommend(
    model: &TableModel,
    unit: &TableUnit,
    mechanism: Mechanism,
    row_range: PriorityRange,
    col_range: PriorityRange,
) -> Result<Vec<Recommendation>, RecommendError> {
    let mut all = enumerate_candidates(model, unit, mechanism)?;
    all.retain(|r| row_range.contains(r.priority.row) && col_range.contains(r.priority.col));
    Ok(all)
}
