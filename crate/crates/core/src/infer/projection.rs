use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::provgraph::ProvExample;
use crate::relcore::Instance;

/// Lower and upper bound on the node count of a consistent-minimal query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SizeBounds {
    pub min_nodes: usize,
    pub max_nodes: usize,
}

impl SizeBounds {
    /// `d` distinct provenance relations, `k` output positions and `n` the
    /// largest explanation give `[d, k + d * n]`.
    pub fn of(ex: &ProvExample, d: &Instance) -> Self {
        let rels = ex.relations(d).len();
        let k = ex.output_arity();
        let n = ex.max_explanation();
        SizeBounds {
            min_nodes: rels,
            max_nodes: k + rels * n,
        }
    }
}

/// Per output position, the `(relation, attribute index)` pairs that can be
/// projected to it in every row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectionCandidates {
    pub per_position: Vec<BTreeSet<(String, usize)>>,
}

/// Intersects, across rows, the attributes whose value in some explanation
/// tuple equals the row's output value at each position.
pub fn infer_projection(ex: &ProvExample, d: &Instance) -> Result<ProjectionCandidates> {
    let k = ex.output_arity();
    let mut per_position: Vec<Option<BTreeSet<(String, usize)>>> = vec![None; k];
    for row in ex.rows() {
        for (pos, slot) in per_position.iter_mut().enumerate() {
            let target = &row.output.values()[pos];
            let mut here = BTreeSet::new();
            for a in &row.explanation {
                let t = d.get(a.as_str())?;
                for (i, v) in t.values.iter().enumerate() {
                    if v == target {
                        here.insert((t.relation.clone(), i));
                    }
                }
            }
            *slot = Some(match slot.take() {
                None => here,
                Some(prev) => prev.intersection(&here).cloned().collect(),
            });
        }
    }
    let per_position: Vec<BTreeSet<(String, usize)>> =
        per_position.into_iter().map(Option::unwrap_or_default).collect();
    if let Some(position) = per_position.iter().position(BTreeSet::is_empty) {
        return Err(Error::NoProjection { position });
    }
    Ok(ProjectionCandidates { per_position })
}
