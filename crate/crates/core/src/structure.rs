//! Hierarchy vs. bicluster detection on one heading axis.

use serde::{Deserialize, Serialize};

use crate::model::{HeadingAxis, HeadingNode};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureAnnotation {
    /// 1-based level `k` such that levels `k..=depth` form a bicluster.
    pub bicluster_from: Option<usize>,
    /// `uniform[i - 1]` describes the boundary between levels `i` and `i + 1`.
    pub uniform: Vec<bool>,
}

impl StructureAnnotation {
    /// Whether the boundary between 1-based levels `upper` and `upper + 1` is uniform.
    pub fn boundary_uniform(&self, upper: usize) -> bool {
        upper >= 1 && self.uniform.get(upper - 1).copied().unwrap_or(false)
    }

    /// Whether every parent of a level has the same ordered child labels.
    /// Level 1 has a single implicit parent and is always uniform.
    pub fn level_uniform(&self, level: usize) -> bool {
        level == 1 || self.boundary_uniform(level - 1)
    }
}

fn child_names(n: &HeadingNode) -> impl Iterator<Item = &str> + Clone {
    n.children.iter().map(HeadingNode::name)
}

pub fn detect_structure(axis: &HeadingAxis) -> StructureAnnotation {
    let depth = axis.depth();
    let uniform: Vec<bool> = (1..depth)
        .map(|level| {
            let nodes = axis.nodes_at_level(level);
            let Some((first, rest)) = nodes.split_first() else {
                return true;
            };
            rest.iter()
                .all(|n| child_names(n).eq(child_names(first)))
        })
        .collect();
    // Smallest k with boundaries (k-1..depth-1) all uniform; k = 1 has no upper boundary.
    let last_break = uniform.iter().rposition(|u| !u).map(|i| i + 1);
    let bicluster_from = match last_break {
        None => Some(1),
        Some(b) if b + 2 <= depth => Some(b + 2),
        Some(_) => None,
    };
    StructureAnnotation {
        bicluster_from,
        uniform,
    }
}
