//! Candidate join graphs in growing size order.
//!
//! A candidate is determined up to join closure by a partition of its
//! attribute slots into join classes, plus one slot per head position. Each
//! class must be connected under the edge vocabulary, so enumeration walks
//! the connected set partitions of every vocabulary component of the slots.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::projection::{ProjectionCandidates, SizeBounds};
use crate::joingraph::{CanonicalKey, JoinGraph, JoinNode, JoinPair};
use crate::provgraph::ProvenanceGraph;
use crate::relcore::{Instance, Schema};

/// Attribute pairs that may label a join edge: foreign-key pairs plus pairs
/// witnessed as shared constants in some provenance graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EdgeVocabulary {
    pairs: BTreeSet<(String, usize, String, usize)>,
}

impl EdgeVocabulary {
    pub fn build<'a>(schema: &Schema, graphs: impl IntoIterator<Item = &'a ProvenanceGraph>) -> Self {
        let mut v = EdgeVocabulary::default();
        for link in schema.links() {
            v.insert(&link.from.0, link.from.1, &link.to.0, link.to.1);
        }
        for g in graphs {
            for (a, b, witnesses) in g.edges() {
                let ra = &g.tuple(a.as_str()).unwrap().relation;
                let rb = &g.tuple(b.as_str()).unwrap().relation;
                for w in witnesses {
                    v.insert(ra, w.left, rb, w.right);
                }
            }
        }
        v
    }

    pub fn insert(&mut self, ra: &str, i: usize, rb: &str, j: usize) {
        self.pairs.insert((ra.to_owned(), i, rb.to_owned(), j));
        self.pairs.insert((rb.to_owned(), j, ra.to_owned(), i));
    }

    pub fn allows(&self, ra: &str, i: usize, rb: &str, j: usize) -> bool {
        self.pairs.contains(&(ra.to_owned(), i, rb.to_owned(), j))
    }

    /// Distinct unordered pairs.
    pub fn len(&self) -> usize {
        self.pairs.iter().filter(|(ra, i, rb, j)| (ra, i) <= (rb, j)).count()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// All candidates over one relation multiset, sorted and deduplicated.
#[derive(Clone, Debug)]
pub struct CandidateBatch {
    pub size: usize,
    pub relations: Vec<String>,
    pub graphs: Vec<JoinGraph>,
}

/// Lazy, size-ordered stream of connected candidate join graphs.
///
/// Within a size, relation multisets come in lexicographic order; within a
/// multiset, graphs binding more slots come first (the most specific
/// join structure the rows support wins), then canonical-key order. No two
/// emitted graphs are isomorphic.
pub struct CandidateGraphs {
    relations: Vec<String>,
    arities: BTreeMap<String, usize>,
    vocabulary: EdgeVocabulary,
    projection: ProjectionCandidates,
    size: usize,
    max_nodes: usize,
    multisets: VecDeque<Vec<String>>,
    buffer: VecDeque<JoinGraph>,
}

impl CandidateGraphs {
    pub fn new(
        relations: BTreeSet<String>,
        schema: &Schema,
        vocabulary: EdgeVocabulary,
        projection: ProjectionCandidates,
        bounds: SizeBounds,
    ) -> Self {
        let arities = relations
            .iter()
            .map(|r| (r.clone(), schema.relation(r).map_or(0, |d| d.arity())))
            .collect();
        // Extra copies of a relation cannot join relations the vocabulary
        // leaves apart, so a disconnected relation graph ends the stream.
        let relations: Vec<String> = relations.into_iter().collect();
        let linked = relations_linked(&relations, &vocabulary);
        let max_nodes = if linked { bounds.max_nodes } else { 0 };
        CandidateGraphs {
            relations,
            arities,
            vocabulary,
            projection,
            size: bounds.min_nodes,
            max_nodes,
            multisets: VecDeque::new(),
            buffer: VecDeque::new(),
        }
    }

    /// Candidates of the next non-empty relation multiset.
    pub fn next_batch(&mut self) -> Option<CandidateBatch> {
        loop {
            while self.multisets.is_empty() {
                if self.size > self.max_nodes || self.relations.is_empty() {
                    return None;
                }
                self.multisets = multisets(&self.relations, self.size).into();
                self.size += 1;
            }
            let relations = self.multisets.pop_front().unwrap();
            let graphs = self.graphs_over(&relations);
            if !graphs.is_empty() {
                return Some(CandidateBatch {
                    size: relations.len(),
                    relations,
                    graphs,
                });
            }
        }
    }

    /// Every connected candidate over `relations` (sorted), deduplicated up
    /// to isomorphism and sorted by (bound slots descending, canonical key).
    pub fn graphs_over(&self, relations: &[String]) -> Vec<JoinGraph> {
        let nodes: Vec<(String, usize)> = relations.iter().map(|r| (r.clone(), self.arities[r])).collect();
        let slots: Vec<(usize, usize)> = nodes
            .iter()
            .enumerate()
            .flat_map(|(u, (_, arity))| (0..*arity).map(move |i| (u, i)))
            .collect();
        let allowed = |a: (usize, usize), b: (usize, usize)| {
            a != b && self.vocabulary.allows(&nodes[a.0].0, a.1, &nodes[b.0].0, b.1)
        };

        // Vocabulary components over slots, each with its connected
        // partitions (blocks of two or more slots).
        let mut partitions_per_component: Vec<Vec<Vec<Vec<(usize, usize)>>>> = Vec::new();
        let mut assigned = vec![false; slots.len()];
        for start in 0..slots.len() {
            if assigned[start] {
                continue;
            }
            let mut comp = vec![start];
            assigned[start] = true;
            let mut k = 0;
            while k < comp.len() {
                let x = comp[k];
                for y in 0..slots.len() {
                    if !assigned[y] && allowed(slots[x], slots[y]) {
                        assigned[y] = true;
                        comp.push(y);
                    }
                }
                k += 1;
            }
            if comp.len() < 2 {
                continue;
            }
            comp.sort_unstable();
            assert!(comp.len() <= 64, "vocabulary component of {} slots", comp.len());
            let members: Vec<(usize, usize)> = comp.iter().map(|&s| slots[s]).collect();
            let adj: Vec<u64> = members
                .iter()
                .map(|&a| {
                    members
                        .iter()
                        .enumerate()
                        .filter(|(_, &b)| allowed(a, b))
                        .fold(0u64, |m, (j, _)| m | (1 << j))
                })
                .collect();
            let full = if members.len() == 64 {
                u64::MAX
            } else {
                (1u64 << members.len()) - 1
            };
            let mut memo = HashMap::new();
            let parts = connected_partitions(full, &adj, &mut memo)
                .into_iter()
                .map(|blocks| {
                    blocks
                        .into_iter()
                        .filter(|b| b.count_ones() > 1)
                        .map(|b| {
                            (0..members.len())
                                .filter(|j| b & (1 << j) != 0)
                                .map(|j| members[j])
                                .collect()
                        })
                        .collect()
                })
                .collect();
            partitions_per_component.push(parts);
        }

        let mut head_options: Vec<Vec<(usize, usize)>> = Vec::new();
        for cands in &self.projection.per_position {
            let opts: Vec<(usize, usize)> = nodes
                .iter()
                .enumerate()
                .flat_map(|(u, (r, _))| cands.iter().filter(move |(cr, _)| cr == r).map(move |&(_, i)| (u, i)))
                .collect();
            if opts.is_empty() {
                return Vec::new();
            }
            head_options.push(opts);
        }

        let mut found: BTreeMap<(Reverse<usize>, CanonicalKey), JoinGraph> = BTreeMap::new();
        let mut choice = vec![0usize; partitions_per_component.len()];
        loop {
            let mut pairs: Vec<JoinPair> = Vec::new();
            for (c, &k) in choice.iter().enumerate() {
                for block in &partitions_per_component[c][k] {
                    for (x, &(u, i)) in block.iter().enumerate() {
                        for &(v, j) in &block[x + 1..] {
                            pairs.push((u, i, v, j));
                        }
                    }
                }
            }
            if nodes_connected(nodes.len(), &pairs) {
                for_each_product(&head_options, &mut |heads| {
                    let mut jn: Vec<JoinNode> = nodes
                        .iter()
                        .map(|(r, a)| JoinNode::new(r.clone(), *a, vec![]))
                        .collect();
                    for (pos, &(u, i)) in heads.iter().enumerate() {
                        jn[u].projections.push((i, pos));
                    }
                    let g = JoinGraph::new(jn, heads.len(), pairs.iter().copied())
                        .expect("candidate graphs are well formed");
                    let key = g.canonical_key();
                    found.entry((Reverse(key.bound_slots()), key)).or_insert(g);
                });
            }
            if !advance(&mut choice, |c| partitions_per_component[c].len()) {
                break;
            }
        }
        found.into_values().collect()
    }
}

impl Iterator for CandidateGraphs {
    type Item = JoinGraph;

    fn next(&mut self) -> Option<JoinGraph> {
        while self.buffer.is_empty() {
            let batch = self.next_batch()?;
            self.buffer.extend(batch.graphs);
        }
        self.buffer.pop_front()
    }
}

fn relations_linked(relations: &[String], vocabulary: &EdgeVocabulary) -> bool {
    let n = relations.len();
    let mut pairs = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let joined = vocabulary
                .pairs
                .iter()
                .any(|(ra, _, rb, _)| *ra == relations[u] && *rb == relations[v]);
            if joined {
                pairs.push((u, 0, v, 0));
            }
        }
    }
    nodes_connected(n, &pairs)
}

/// Sorted multisets of `size` relations containing each of `relations` at
/// least once, in lexicographic order.
fn multisets(relations: &[String], size: usize) -> Vec<Vec<String>> {
    if size < relations.len() {
        return Vec::new();
    }
    let extra = size - relations.len();
    let mut out = Vec::new();
    let mut counts = vec![0usize; relations.len()];
    fn rec(k: usize, left: usize, counts: &mut Vec<usize>, relations: &[String], out: &mut Vec<Vec<String>>) {
        if k + 1 == counts.len() {
            counts[k] = left;
            let mut m = Vec::new();
            for (r, c) in relations.iter().zip(counts.iter()) {
                m.extend(std::iter::repeat_n(r.clone(), c + 1));
            }
            out.push(m);
            return;
        }
        for c in 0..=left {
            counts[k] = c;
            rec(k + 1, left - c, counts, relations, out);
        }
    }
    if relations.is_empty() {
        return out;
    }
    rec(0, extra, &mut counts, relations, &mut out);
    out.sort();
    out.dedup();
    out
}

/// Partitions of `set` into blocks connected under `adj`. Blocks are masks.
fn connected_partitions(set: u64, adj: &[u64], memo: &mut HashMap<u64, Vec<Vec<u64>>>) -> Vec<Vec<u64>> {
    if set == 0 {
        return vec![vec![]];
    }
    if let Some(p) = memo.get(&set) {
        return p.clone();
    }
    let first = set & set.wrapping_neg();
    let rest = set & !first;
    let mut out = Vec::new();
    // Every subset of `rest`, joined with `first`, that is connected.
    let mut sub = rest;
    loop {
        let block = sub | first;
        if is_connected_mask(block, adj) {
            for mut p in connected_partitions(set & !block, adj, memo) {
                p.insert(0, block);
                out.push(p);
            }
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & rest;
    }
    memo.insert(set, out.clone());
    out
}

fn is_connected_mask(block: u64, adj: &[u64]) -> bool {
    let start = block & block.wrapping_neg();
    let mut seen = start;
    let mut frontier = start;
    while frontier != 0 {
        let x = frontier.trailing_zeros() as usize;
        frontier &= frontier - 1;
        let next = adj[x] & block & !seen;
        seen |= next;
        frontier |= next;
    }
    seen == block
}

fn nodes_connected(n: usize, pairs: &[JoinPair]) -> bool {
    if n == 0 {
        return true;
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for &(u, _, v, _) in pairs {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        parent[a] = b;
    }
    let root = find(&mut parent, 0);
    (0..n).all(|x| find(&mut parent, x) == root)
}

/// Odometer step over `choice[c] < len(c)`; false after the last tuple.
fn advance(choice: &mut [usize], len: impl Fn(usize) -> usize) -> bool {
    for c in (0..choice.len()).rev() {
        choice[c] += 1;
        if choice[c] < len(c) {
            return true;
        }
        choice[c] = 0;
    }
    false
}

fn for_each_product(options: &[Vec<(usize, usize)>], visit: &mut dyn FnMut(&[(usize, usize)])) {
    let mut choice = vec![0usize; options.len()];
    let mut current: Vec<(usize, usize)> = options.iter().map(|o| o[0]).collect();
    loop {
        visit(&current);
        if !advance(&mut choice, |c| options[c].len()) {
            return;
        }
        for (c, &k) in choice.iter().enumerate() {
            current[c] = options[c][k];
        }
    }
}

/// Provenance graphs of every row, the vocabulary they induce, and the
/// resulting stream.
pub fn enumerate_candidate_graphs(
    graphs: &[ProvenanceGraph],
    d: &Instance,
    proj: &ProjectionCandidates,
    bounds: SizeBounds,
) -> CandidateGraphs {
    let relations: BTreeSet<String> = graphs
        .iter()
        .flat_map(|g| g.tuples().map(|t| t.relation.clone()))
        .collect();
    let vocabulary = EdgeVocabulary::build(d.schema(), graphs);
    CandidateGraphs::new(relations, d.schema(), vocabulary, proj.clone(), bounds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multisets_repeat_relations() {
        let rels: Vec<String> = vec!["a".into(), "b".into()];
        assert_eq!(multisets(&rels, 1), Vec::<Vec<String>>::new());
        assert_eq!(multisets(&rels, 2), vec![vec!["a", "b"]]);
        assert_eq!(multisets(&rels, 3), vec![vec!["a", "a", "b"], vec!["a", "b", "b"]]);
    }

    #[test]
    fn partitions_of_a_path() {
        // 0 - 1 - 2: {012}, {01}{2}, {0}{12}, {0}{1}{2}; {02}{1} is disconnected
        let adj = [0b010, 0b101, 0b010];
        let parts = connected_partitions(0b111, &adj, &mut HashMap::new());
        assert_eq!(parts.len(), 4);
        let triangle = [0b110, 0b101, 0b011];
        assert_eq!(connected_partitions(0b111, &triangle, &mut HashMap::new()).len(), 5);
    }

    #[test]
    fn odometer_covers_product() {
        let mut seen = Vec::new();
        for_each_product(&[vec![(0, 0), (0, 1)], vec![(1, 0), (1, 1), (1, 2)]], &mut |c| {
            seen.push(c.to_vec())
        });
        assert_eq!(seen.len(), 6);
    }
}
