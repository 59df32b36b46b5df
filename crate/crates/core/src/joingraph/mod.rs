//! Join graphs of conjunctive queries and homomorphisms from join graphs into
//! provenance graphs.
//!
//! A join graph has one node per atom. An edge between two nodes carries the
//! attribute index pairs the two atoms join on; a self-loop carries pairs of
//! distinct indices of one atom that hold the same variable. Head positions
//! are attached to nodes as projection slots.
//!
//! Two join graphs denote the same query when their *join closures* agree:
//! joining `pub.cid = conf.cid` and `conf.cid = domain_conf.cid` implies
//! `pub.cid = domain_conf.cid`. [`JoinGraph::is_isomorphic`] and
//! [`JoinGraph::canonical_key`] compare graphs up to that closure and up to
//! renumbering nodes of the same relation.

mod canon;
mod homomorphism;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

pub use canon::CanonicalKey;
pub(crate) use homomorphism::greedy_cover;
pub use homomorphism::{enumerate_homomorphisms, find_cover, Cover, Homomorphism};

use crate::error::{Error, Result};
use crate::relcore::{Atom, ConjunctiveQuery, Schema, Term};

pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JoinNode {
    pub relation: String,
    pub arity: usize,
    /// `(attribute index, head position)` pairs projected by this node.
    pub projections: Vec<(usize, usize)>,
}

impl JoinNode {
    pub fn new(relation: impl Into<String>, arity: usize, projections: Vec<(usize, usize)>) -> Self {
        JoinNode {
            relation: relation.into(),
            arity,
            projections,
        }
    }
}

/// `(node, attr, node, attr)`: the two slots hold equal values.
pub type JoinPair = (NodeId, usize, NodeId, usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoinGraph {
    nodes: Vec<JoinNode>,
    head_arity: usize,
    /// Keyed by `(u, v)` with `u <= v`; pair `(i, j)` has `i` on `u`.
    edges: BTreeMap<(NodeId, NodeId), BTreeSet<(usize, usize)>>,
    connected: bool,
}

impl JoinGraph {
    pub fn new(nodes: Vec<JoinNode>, head_arity: usize, pairs: impl IntoIterator<Item = JoinPair>) -> Result<Self> {
        let bad = |m: String| Error::InvalidQuery(format!("malformed join graph: {m}"));
        for (id, n) in nodes.iter().enumerate() {
            for &(attr, pos) in &n.projections {
                if attr >= n.arity || pos >= head_arity {
                    return Err(bad(format!("node {id} projects {attr} -> {pos}")));
                }
            }
        }
        let mut edges: BTreeMap<(NodeId, NodeId), BTreeSet<(usize, usize)>> = BTreeMap::new();
        for (u, i, v, j) in pairs {
            if u >= nodes.len() || v >= nodes.len() {
                return Err(bad(format!("edge between unknown nodes {u} and {v}")));
            }
            if i >= nodes[u].arity || j >= nodes[v].arity {
                return Err(bad(format!("join pair ({u}.{i}, {v}.{j}) out of arity")));
            }
            let (key, pair) = match u.cmp(&v) {
                std::cmp::Ordering::Less => ((u, v), (i, j)),
                std::cmp::Ordering::Greater => ((v, u), (j, i)),
                std::cmp::Ordering::Equal if i == j => continue,
                std::cmp::Ordering::Equal => ((u, u), (i.min(j), i.max(j))),
            };
            edges.entry(key).or_default().insert(pair);
        }
        let mut g = JoinGraph {
            nodes,
            head_arity,
            edges,
            connected: false,
        };
        g.connected = g.compute_connected();
        Ok(g)
    }

    /// One node per atom; an edge wherever two atoms (or one atom at two
    /// indices) share a variable; a projection slot for every occurrence of a
    /// head variable. Constants and selections are not part of the graph.
    pub fn from_query(q: &ConjunctiveQuery) -> Self {
        let occ = q.occurrences();
        let mut nodes: Vec<JoinNode> = q
            .atoms
            .iter()
            .map(|a| JoinNode::new(a.relation.clone(), a.terms.len(), vec![]))
            .collect();
        for (pos, h) in q.head.iter().enumerate() {
            for &(a, i) in occ.get(h.as_str()).into_iter().flatten() {
                nodes[a].projections.push((i, pos));
            }
        }
        let mut pairs = Vec::new();
        for slots in occ.values() {
            for (k, &(a, i)) in slots.iter().enumerate() {
                for &(b, j) in &slots[k + 1..] {
                    pairs.push((a, i, b, j));
                }
            }
        }
        JoinGraph::new(nodes, q.head.len(), pairs).expect("query-derived graph is well formed")
    }

    pub fn nodes(&self) -> &[JoinNode] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn head_arity(&self) -> usize {
        self.head_arity
    }

    /// Edges as `((u, v), pairs)` with `u <= v`.
    pub fn edges(&self) -> impl Iterator<Item = (&(NodeId, NodeId), &BTreeSet<(usize, usize)>)> {
        self.edges.iter()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// All join pairs, oriented as stored.
    pub fn join_pairs(&self) -> impl Iterator<Item = JoinPair> + '_ {
        self.edges
            .iter()
            .flat_map(|(&(u, v), ps)| ps.iter().map(move |&(i, j)| (u, i, v, j)))
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.edges.contains_key(&(u.min(v), u.max(v)))
    }

    /// Sorted relation names, one per node.
    pub fn relation_multiset(&self) -> Vec<&str> {
        let mut r: Vec<&str> = self.nodes.iter().map(|n| n.relation.as_str()).collect();
        r.sort_unstable();
        r
    }

    /// Cached at construction; see [`JoinGraph::compute_connected`].
    pub fn is_connected(&self) -> bool {
        self.connected
    }

    /// Connectivity recomputed from the edge set. The empty graph counts as
    /// connected.
    pub fn compute_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.nodes.len()];
        seen[0] = true;
        let mut stack = vec![0];
        while let Some(n) = stack.pop() {
            for &(u, v) in self.edges.keys() {
                let other = if u == n {
                    v
                } else if v == n {
                    u
                } else {
                    continue;
                };
                if !seen[other] {
                    seen[other] = true;
                    stack.push(other);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Equivalence classes of slots under the join pairs and shared head
    /// positions. Singleton classes are omitted.
    pub fn join_classes(&self) -> Vec<BTreeSet<Slot>> {
        canon::classes(self)
    }

    pub fn canonical_key(&self) -> CanonicalKey {
        canon::canonical_key(self)
    }

    /// Same query up to variable renaming and atom order.
    pub fn is_isomorphic(&self, other: &JoinGraph) -> bool {
        self.head_arity == other.head_arity
            && self.relation_multiset() == other.relation_multiset()
            && self.canonical_key() == other.canonical_key()
    }

    /// The conjunctive query of this graph (no selections). Variables are
    /// named after the first attribute in their class.
    pub fn to_query(&self, schema: &Schema) -> Result<ConjunctiveQuery> {
        let covered: BTreeSet<usize> = self
            .nodes
            .iter()
            .flat_map(|n| n.projections.iter().map(|&(_, p)| p))
            .collect();
        if let Some(missing) = (0..self.head_arity).find(|p| !covered.contains(p)) {
            return Err(Error::IncompleteProjection(missing));
        }
        for n in &self.nodes {
            let rel = schema
                .relation(&n.relation)
                .ok_or_else(|| Error::InvalidQuery(format!("unknown relation `{}`", n.relation)))?;
            if rel.arity() != n.arity {
                return Err(Error::InvalidQuery(format!(
                    "node over `{}` has arity {}, relation has {}",
                    n.relation,
                    n.arity,
                    rel.arity()
                )));
            }
        }

        let mut class_of: BTreeMap<Slot, usize> = BTreeMap::new();
        for (ci, class) in self.join_classes().into_iter().enumerate() {
            for s in class {
                class_of.insert(s, ci);
            }
        }
        let mut used = BTreeSet::new();
        let mut class_names: BTreeMap<usize, String> = BTreeMap::new();
        let mut atoms = Vec::new();
        for (u, n) in self.nodes.iter().enumerate() {
            let rel = schema.relation(&n.relation).unwrap();
            let terms = (0..n.arity)
                .map(|i| {
                    let base = rel.attr_name(i);
                    let name = match class_of.get(&Slot::Attr(u, i)) {
                        Some(&ci) => class_names
                            .entry(ci)
                            .or_insert_with(|| crate::relcore::fresh_var(base, &mut used))
                            .clone(),
                        None => crate::relcore::fresh_var(base, &mut used),
                    };
                    Term::Var(name)
                })
                .collect();
            atoms.push(Atom::new(n.relation.clone(), terms));
        }
        let head = (0..self.head_arity)
            .map(|p| class_names[&class_of[&Slot::Head(p)]].clone())
            .collect();
        Ok(ConjunctiveQuery::new(head, atoms, vec![]))
    }

    /// Edge list in the provenance-graph export format, nodes written as
    /// `relation#id`.
    pub fn to_edge_list(&self) -> String {
        let label = |u: NodeId| format!("{}#{u}", self.nodes[u].relation);
        let mut out = String::new();
        let mut touched = BTreeSet::new();
        for &(u, v) in self.edges.keys() {
            let _ = writeln!(out, "{} {}", label(u), label(v));
            touched.insert(u);
            touched.insert(v);
        }
        for u in (0..self.nodes.len()).filter(|u| !touched.contains(u)) {
            let _ = writeln!(out, "{}", label(u));
        }
        out
    }
}

/// A position that can hold a variable: an attribute of a node, or a head
/// position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    Attr(NodeId, usize),
    Head(usize),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_shared_variables_make_one_edge() {
        let q = ConjunctiveQuery::parse_datalog("q(x) :- R(x, y, z), S(y, z)").unwrap();
        let g = JoinGraph::from_query(&q);
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
        let (_, pairs) = g.edges().next().unwrap();
        assert_eq!(pairs, &BTreeSet::from([(1, 0), (2, 1)]));
    }

    #[test]
    fn connectivity() {
        let single = JoinGraph::new(vec![JoinNode::new("r", 1, vec![(0, 0)])], 1, []).unwrap();
        assert!(single.is_connected());
        let two = JoinGraph::new(
            vec![JoinNode::new("r", 1, vec![]), JoinNode::new("s", 1, vec![])],
            0,
            [],
        )
        .unwrap();
        assert!(!two.is_connected());
        let empty = JoinGraph::new(vec![], 0, []).unwrap();
        assert!(empty.is_connected());
        let linked = JoinGraph::new(two.nodes().to_vec(), 0, [(0, 0, 1, 0)]).unwrap();
        assert!(linked.is_connected());
        assert_eq!(linked.compute_connected(), linked.is_connected());
    }

    #[test]
    fn rejects_out_of_range() {
        let n = vec![JoinNode::new("r", 1, vec![])];
        assert!(JoinGraph::new(n.clone(), 0, [(0, 1, 0, 0)]).is_err());
        assert!(JoinGraph::new(n.clone(), 0, [(0, 0, 1, 0)]).is_err());
        assert!(JoinGraph::new(vec![JoinNode::new("r", 1, vec![(0, 1)])], 1, []).is_err());
    }

    #[test]
    fn closure_isomorphism_ignores_redundant_edges() {
        // a.x = b.x, b.x = c.x versus a.x = c.x, c.x = b.x
        let nodes = vec![
            JoinNode::new("a", 1, vec![(0, 0)]),
            JoinNode::new("b", 1, vec![]),
            JoinNode::new("c", 1, vec![]),
        ];
        let g1 = JoinGraph::new(nodes.clone(), 1, [(0, 0, 1, 0), (1, 0, 2, 0)]).unwrap();
        let g2 = JoinGraph::new(nodes.clone(), 1, [(0, 0, 2, 0), (2, 0, 1, 0)]).unwrap();
        let g3 = JoinGraph::new(nodes, 1, [(0, 0, 1, 0)]).unwrap();
        assert!(g1.is_isomorphic(&g2));
        assert!(!g1.is_isomorphic(&g3));
    }

    #[test]
    fn node_renumbering_within_relation() {
        let nodes = vec![JoinNode::new("r", 2, vec![(0, 0)]), JoinNode::new("r", 2, vec![])];
        let g1 = JoinGraph::new(nodes, 1, [(0, 1, 1, 0)]).unwrap();
        let nodes = vec![JoinNode::new("r", 2, vec![]), JoinNode::new("r", 2, vec![(0, 0)])];
        let g2 = JoinGraph::new(nodes, 1, [(1, 1, 0, 0)]).unwrap();
        assert!(g1.is_isomorphic(&g2));
    }

    #[test]
    fn to_query_needs_every_head_position() {
        let schema = Schema::new(
            vec![crate::relcore::RelationDecl::new(
                "conf",
                vec![
                    crate::relcore::Attribute::new("cid", crate::relcore::ValueType::Integer),
                    crate::relcore::Attribute::new("cname", crate::relcore::ValueType::Text),
                ],
                vec![],
            )],
            vec![],
        )
        .unwrap();
        let g = JoinGraph::new(vec![JoinNode::new("conf", 2, vec![(1, 0)])], 1, []).unwrap();
        assert_eq!(
            g.to_query(&schema).unwrap().to_datalog(),
            "q(cname) :- conf(cid, cname)"
        );
        let g = JoinGraph::new(vec![JoinNode::new("conf", 2, vec![(1, 0)])], 2, []).unwrap();
        assert!(matches!(g.to_query(&schema), Err(Error::IncompleteProjection(1))));
    }
}
