use std::collections::BTreeSet;

use super::{JoinGraph, NodeId};
use crate::provgraph::ProvenanceGraph;
use crate::relcore::{AnnotatedTuple, Annotation, Assignment, Instance, OutputTuple};

/// Node id -> provenance-graph node.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Homomorphism {
    pub map: Vec<Annotation>,
}

impl Homomorphism {
    pub fn image(&self) -> BTreeSet<&Annotation> {
        self.map.iter().collect()
    }

    /// The same mapping read as an assignment of the atoms of
    /// `g.to_query(..)`, whose atoms follow node order.
    pub fn to_assignment(&self) -> Assignment {
        Assignment(self.map.clone())
    }

    /// Re-checks the homomorphism conditions against raw tuple values,
    /// without consulting the provenance graph's witnesses: relation names
    /// agree, every join pair holds the same constant at the paired indices,
    /// projected indices carry the output's constants, and every image is a
    /// provenance node.
    pub fn is_valid(&self, g: &JoinGraph, p: &ProvenanceGraph, o: &OutputTuple, d: &Instance) -> bool {
        if self.map.len() != g.node_count() || o.arity() != g.head_arity() {
            return false;
        }
        let tuples: Option<Vec<&AnnotatedTuple>> = self.map.iter().map(|a| d.tuple(a.as_str())).collect();
        let Some(tuples) = tuples else { return false };
        if self.map.iter().any(|a| !p.contains(a.as_str())) {
            return false;
        }
        for (n, t) in g.nodes().iter().zip(&tuples) {
            if n.relation != t.relation || n.arity != t.values.len() {
                return false;
            }
            if n.projections.iter().any(|&(i, pos)| t.values[i] != o.values()[pos]) {
                return false;
            }
        }
        g.join_pairs()
            .all(|(u, i, v, j)| tuples[u].values[i] == tuples[v].values[j])
    }
}

/// A family of homomorphisms whose images jointly cover the provenance
/// graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cover {
    pub homomorphisms: Vec<Homomorphism>,
}

impl Cover {
    pub fn images(&self) -> BTreeSet<&Annotation> {
        self.homomorphisms.iter().flat_map(|h| h.map.iter()).collect()
    }

    pub fn covers(&self, p: &ProvenanceGraph) -> bool {
        let img = self.images();
        p.nodes().all(|a| img.contains(a)) && img.iter().all(|a| p.contains(a.as_str()))
    }
}

/// Join-pair check through the provenance graph's recorded witnesses. A pair
/// mapped onto the same index of one tuple holds trivially.
fn pair_holds(p: &ProvenanceGraph, a: &Annotation, i: usize, b: &Annotation, j: usize) -> bool {
    (a == b && i == j) || p.shares(a, i, b, j)
}

/// Every homomorphism from `g` into `p` that produces `o`, sorted.
pub fn enumerate_homomorphisms(g: &JoinGraph, p: &ProvenanceGraph, o: &OutputTuple) -> Vec<Homomorphism> {
    let mut out = Vec::new();
    if o.arity() != g.head_arity() {
        return out;
    }
    let n = g.node_count();
    if n == 0 {
        out.push(Homomorphism { map: vec![] });
        return out;
    }

    let candidates: Vec<Vec<&Annotation>> = g
        .nodes()
        .iter()
        .enumerate()
        .map(|(u, node)| {
            p.tuples()
                .filter(|t| t.relation == node.relation && t.values.len() == node.arity)
                .filter(|t| node.projections.iter().all(|&(i, pos)| t.values[i] == o.values()[pos]))
                .filter(|t| {
                    g.edges
                        .get(&(u, u))
                        .into_iter()
                        .flatten()
                        .all(|&(i, j)| pair_holds(p, &t.annotation, i, &t.annotation, j))
                })
                .map(|t| &t.annotation)
                .collect()
        })
        .collect();
    if candidates.iter().any(Vec::is_empty) {
        return out;
    }

    let order = search_order(g, &candidates);
    // For each node, join pairs towards nodes placed earlier in `order`,
    // oriented as (own attr, earlier node, earlier attr).
    let mut placed_at = vec![usize::MAX; n];
    for (k, &u) in order.iter().enumerate() {
        placed_at[u] = k;
    }
    let mut back: Vec<Vec<(usize, NodeId, usize)>> = vec![Vec::new(); n];
    for (u, i, v, j) in g.join_pairs() {
        if u == v {
            continue;
        }
        if placed_at[u] > placed_at[v] {
            back[u].push((i, v, j));
        } else {
            back[v].push((j, u, i));
        }
    }

    let mut map: Vec<Option<&Annotation>> = vec![None; n];
    extend(0, &order, &candidates, &back, p, &mut map, &mut out);
    out.sort();
    out
}

fn search_order(g: &JoinGraph, candidates: &[Vec<&Annotation>]) -> Vec<NodeId> {
    let n = g.node_count();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        // Prefer nodes adjacent to placed ones, then fewest candidates.
        let next = (0..n)
            .filter(|&u| !placed[u])
            .min_by_key(|&u| {
                let adjacent = order.iter().any(|&v| g.has_edge(u, v));
                (!adjacent, candidates[u].len(), u)
            })
            .unwrap();
        placed[next] = true;
        order.push(next);
    }
    order
}

fn extend<'a>(
    depth: usize,
    order: &[NodeId],
    candidates: &[Vec<&'a Annotation>],
    back: &[Vec<(usize, NodeId, usize)>],
    p: &ProvenanceGraph,
    map: &mut Vec<Option<&'a Annotation>>,
    out: &mut Vec<Homomorphism>,
) {
    if depth == order.len() {
        out.push(Homomorphism {
            map: map.iter().map(|a| a.unwrap().clone()).collect(),
        });
        return;
    }
    let u = order[depth];
    for &cand in &candidates[u] {
        let ok = back[u]
            .iter()
            .all(|&(i, v, j)| pair_holds(p, cand, i, map[v].unwrap(), j));
        if ok {
            map[u] = Some(cand);
            extend(depth + 1, order, candidates, back, p, map, out);
            map[u] = None;
        }
    }
}

/// A family of homomorphisms covering every node of `p`, if one exists.
///
/// A cover exists exactly when the images of all homomorphisms together
/// cover `p`, so greedy selection over the full enumeration is complete.
pub fn find_cover(g: &JoinGraph, p: &ProvenanceGraph, o: &OutputTuple) -> Option<Cover> {
    let needed: BTreeSet<&str> = g.nodes().iter().map(|n| n.relation.as_str()).collect();
    if p.tuples().any(|t| !needed.contains(t.relation.as_str())) {
        return None;
    }
    let homs = enumerate_homomorphisms(g, p, o);
    greedy_cover(homs, p)
}

pub(crate) fn greedy_cover(homs: Vec<Homomorphism>, p: &ProvenanceGraph) -> Option<Cover> {
    let mut uncovered: BTreeSet<&Annotation> = p.nodes().collect();
    let images: Vec<BTreeSet<&Annotation>> = homs.iter().map(Homomorphism::image).collect();
    let mut chosen = Vec::new();
    while !uncovered.is_empty() {
        let (best, gain) = images
            .iter()
            .enumerate()
            .map(|(k, img)| (k, img.intersection(&uncovered).count()))
            .fold((usize::MAX, 0), |acc, (k, g)| if g > acc.1 { (k, g) } else { acc });
        if gain == 0 {
            return None;
        }
        for a in &images[best] {
            uncovered.remove(a);
        }
        chosen.push(best);
    }
    Some(Cover {
        homomorphisms: chosen.into_iter().map(|k| homs[k].clone()).collect(),
    })
}
