//! Provenance graphs: explanation tuples as nodes, an edge wherever two
//! tuples share a constant.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::relcore::{AnnotatedTuple, Annotation, Instance, OutputTuple, Value};

/// One `(I, O)` pair: an explanation and the output it explains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExampleRow {
    pub explanation: BTreeSet<Annotation>,
    pub output: OutputTuple,
}

impl ExampleRow {
    pub fn new<A: Into<Annotation>>(explanation: impl IntoIterator<Item = A>, output: OutputTuple) -> Self {
        ExampleRow {
            explanation: explanation.into_iter().map(Into::into).collect(),
            output,
        }
    }
}

/// A prov-example: rows of explanations with their outputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProvExample {
    rows: Vec<ExampleRow>,
}

impl ProvExample {
    /// Checks that every row has a non-empty explanation over tuples of `d`
    /// and that all outputs share one arity.
    pub fn new(rows: Vec<ExampleRow>, d: &Instance) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidExample("no rows".into()));
        }
        let arity = rows[0].output.arity();
        for (i, row) in rows.iter().enumerate() {
            if row.explanation.is_empty() {
                return Err(Error::InvalidExample(format!("row {} has an empty explanation", i + 1)));
            }
            if row.output.arity() != arity {
                return Err(Error::InvalidExample(format!(
                    "row {} has {} output values, row 1 has {arity}",
                    i + 1,
                    row.output.arity()
                )));
            }
            for a in &row.explanation {
                d.get(a.as_str())?;
            }
        }
        Ok(ProvExample { rows })
    }

    pub fn rows(&self) -> &[ExampleRow] {
        &self.rows
    }

    pub fn output_arity(&self) -> usize {
        self.rows[0].output.arity()
    }

    /// Distinct relation names across all explanations.
    pub fn relations<'a>(&self, d: &'a Instance) -> BTreeSet<&'a str> {
        self.rows
            .iter()
            .flat_map(|r| r.explanation.iter())
            .filter_map(|a| d.tuple(a.as_str()))
            .map(|t| t.relation.as_str())
            .collect()
    }

    /// Size of the largest explanation.
    pub fn max_explanation(&self) -> usize {
        self.rows.iter().map(|r| r.explanation.len()).max().unwrap_or(0)
    }
}

/// `left` is the attribute index on the edge's first (smaller) annotation,
/// `right` the index on the second. Both cells hold `value`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Witness {
    pub left: usize,
    pub right: usize,
    pub value: Value,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProvenanceGraph {
    tuples: BTreeMap<Annotation, AnnotatedTuple>,
    edges: BTreeMap<(Annotation, Annotation), BTreeSet<Witness>>,
}

impl ProvenanceGraph {
    /// Builds the graph of `explanation` over `d`. A self-edge needs the same
    /// constant at two distinct attribute indices of one tuple.
    pub fn build<'a, I>(explanation: I, d: &Instance) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Annotation>,
    {
        let mut tuples = BTreeMap::new();
        for a in explanation {
            tuples.insert(a.clone(), d.get(a.as_str())?.clone());
        }
        let list: Vec<&AnnotatedTuple> = tuples.values().collect();
        let mut edges: BTreeMap<(Annotation, Annotation), BTreeSet<Witness>> = BTreeMap::new();
        for (i, ti) in list.iter().enumerate() {
            for tj in &list[i..] {
                let same = ti.annotation == tj.annotation;
                let mut found = BTreeSet::new();
                for (a, va) in ti.values.iter().enumerate() {
                    for (b, vb) in tj.values.iter().enumerate() {
                        if va == vb && !(same && a == b) {
                            found.insert(Witness {
                                left: a,
                                right: b,
                                value: va.clone(),
                            });
                        }
                    }
                }
                if !found.is_empty() {
                    edges.insert((ti.annotation.clone(), tj.annotation.clone()), found);
                }
            }
        }
        Ok(ProvenanceGraph { tuples, edges })
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Annotation> {
        self.tuples.keys()
    }

    pub fn node_count(&self) -> usize {
        self.tuples.len()
    }

    pub fn contains(&self, a: &str) -> bool {
        self.tuples.contains_key(a)
    }

    pub fn tuple(&self, a: &str) -> Option<&AnnotatedTuple> {
        self.tuples.get(a)
    }

    pub fn tuples(&self) -> impl Iterator<Item = &AnnotatedTuple> {
        self.tuples.values()
    }

    /// Edges as `(smaller, larger, witnesses)`.
    pub fn edges(&self) -> impl Iterator<Item = (&Annotation, &Annotation, &BTreeSet<Witness>)> {
        self.edges.iter().map(|((a, b), w)| (a, b, w))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        let key = ordered(a, b);
        self.edges
            .contains_key(&(Annotation::from(key.0), Annotation::from(key.1)))
    }

    /// Whether `a` at index `i` equals `b` at index `j` according to the
    /// recorded witnesses.
    pub fn shares(&self, a: &Annotation, i: usize, b: &Annotation, j: usize) -> bool {
        let (key, (left, right)) = if a <= b {
            ((a.clone(), b.clone()), (i, j))
        } else {
            ((b.clone(), a.clone()), (j, i))
        };
        self.edges
            .get(&key)
            .is_some_and(|ws| ws.iter().any(|w| w.left == left && w.right == right))
    }

    /// Maximal connected node sets, ordered by their smallest annotation.
    pub fn connected_components(&self) -> Vec<BTreeSet<Annotation>> {
        let mut adj: BTreeMap<&Annotation, Vec<&Annotation>> = self.tuples.keys().map(|a| (a, Vec::new())).collect();
        for (a, b) in self.edges.keys() {
            adj.get_mut(a).unwrap().push(b);
            adj.get_mut(b).unwrap().push(a);
        }
        let mut seen: BTreeSet<&Annotation> = BTreeSet::new();
        let mut out = Vec::new();
        for start in self.tuples.keys() {
            if !seen.insert(start) {
                continue;
            }
            let mut comp = BTreeSet::from([start.clone()]);
            let mut stack = vec![start];
            while let Some(n) = stack.pop() {
                for &m in &adj[n] {
                    if seen.insert(m) {
                        comp.insert(m.clone());
                        stack.push(m);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components().len() <= 1
    }

    /// One `a b` line per edge, then one line per isolated node.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let mut touched = BTreeSet::new();
        for (a, b) in self.edges.keys() {
            let _ = writeln!(out, "{a} {b}");
            touched.insert(a);
            touched.insert(b);
        }
        for a in self.tuples.keys().filter(|a| !touched.contains(a)) {
            let _ = writeln!(out, "{a}");
        }
        out
    }
}

fn ordered<'a>(a: &'a str, b: &'a str) -> (&'a str, &'a str) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}
