use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{AnnotatedTuple, Annotation, ConjunctiveQuery, Instance, OutputTuple, Term, Value};
use crate::error::{Error, Result};

/// Atom index -> annotation of the tuple the atom is mapped to.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment(pub Vec<Annotation>);

impl Assignment {
    pub fn tuples(&self) -> &[Annotation] {
        &self.0
    }

    /// Checks the assignment against `q` and `d` from scratch: relation names
    /// agree, constants match, each variable takes one value and selections
    /// hold. Returns the produced output tuple.
    pub fn check(&self, q: &ConjunctiveQuery, d: &Instance) -> Option<OutputTuple> {
        if self.0.len() != q.atoms.len() {
            return None;
        }
        let mut binding: HashMap<&str, &Value> = HashMap::new();
        for (atom, ann) in q.atoms.iter().zip(&self.0) {
            let t = d.tuple(ann.as_str())?;
            if t.relation != atom.relation || t.values.len() != atom.terms.len() {
                return None;
            }
            for (term, v) in atom.terms.iter().zip(&t.values) {
                match term {
                    Term::Const(c) if c != v => return None,
                    Term::Const(_) => {}
                    Term::Var(x) => {
                        if *binding.entry(x.as_str()).or_insert(v) != v {
                            return None;
                        }
                    }
                }
            }
        }
        for s in &q.selections {
            if binding.get(s.var.as_str()) != Some(&&s.value) {
                return None;
            }
        }
        q.head
            .iter()
            .map(|h| binding.get(h.as_str()).map(|v| (*v).clone()))
            .collect::<Option<Vec<_>>>()
            .map(OutputTuple)
    }
}

/// Output tuples with the complete set of assignments producing each.
pub type Evaluation = BTreeMap<OutputTuple, BTreeSet<Assignment>>;

/// Evaluates `q` over `d`, keeping every assignment per output tuple.
pub fn evaluate(q: &ConjunctiveQuery, d: &Instance) -> Result<Evaluation> {
    q.validate(d.schema())?;
    let mut selected: HashMap<&str, &Value> = HashMap::new();
    for s in &q.selections {
        match selected.get(s.var.as_str()) {
            Some(v) if **v != s.value => return Ok(Evaluation::new()),
            _ => {
                selected.insert(s.var.as_str(), &s.value);
            }
        }
    }
    let candidates: Vec<Vec<&AnnotatedTuple>> = q.atoms.iter().map(|a| d.tuples_of(&a.relation).collect()).collect();
    let mut search = Search {
        q,
        order: atom_order(q, &selected),
        candidates,
        selected,
        binding: HashMap::new(),
        chosen: vec![None; q.atoms.len()],
        out: Evaluation::new(),
    };
    search.run(0);
    Ok(search.out)
}

/// Union of the annotations used by every assignment producing `o`.
pub fn lineage(q: &ConjunctiveQuery, d: &Instance, o: &OutputTuple) -> Result<BTreeSet<Annotation>> {
    let eval = evaluate(q, d)?;
    let assignments = eval.get(o).ok_or_else(|| Error::NotAnOutput(o.display_strings()))?;
    Ok(assignments.iter().flat_map(|a| a.0.iter().cloned()).collect())
}

/// Greedy join order: start from the most constrained atom, then always
/// continue with the atom sharing the most already-bound variables.
fn atom_order(q: &ConjunctiveQuery, selected: &HashMap<&str, &Value>) -> Vec<usize> {
    let n = q.atoms.len();
    let mut placed = vec![false; n];
    let mut bound: BTreeSet<&str> = BTreeSet::new();
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let best = (0..n)
            .filter(|&i| !placed[i])
            .max_by_key(|&i| {
                let score: usize = q.atoms[i]
                    .terms
                    .iter()
                    .map(|t| match t {
                        Term::Const(_) => 1,
                        Term::Var(v) if bound.contains(v.as_str()) || selected.contains_key(v.as_str()) => 1,
                        Term::Var(_) => 0,
                    })
                    .sum();
                // prefer lower index on ties
                (score, std::cmp::Reverse(i))
            })
            .unwrap();
        placed[best] = true;
        bound.extend(q.atoms[best].terms.iter().filter_map(Term::as_var));
        order.push(best);
    }
    order
}

struct Search<'a> {
    q: &'a ConjunctiveQuery,
    order: Vec<usize>,
    candidates: Vec<Vec<&'a AnnotatedTuple>>,
    selected: HashMap<&'a str, &'a Value>,
    binding: HashMap<&'a str, &'a Value>,
    chosen: Vec<Option<&'a Annotation>>,
    out: Evaluation,
}

impl<'a> Search<'a> {
    fn run(&mut self, depth: usize) {
        if depth == self.order.len() {
            let output = OutputTuple(self.q.head.iter().map(|h| self.binding[h.as_str()].clone()).collect());
            let assignment = Assignment(self.chosen.iter().map(|a| a.unwrap().clone()).collect());
            self.out.entry(output).or_default().insert(assignment);
            return;
        }
        let ai = self.order[depth];
        let atom = &self.q.atoms[ai];
        for ti in 0..self.candidates[ai].len() {
            let t = self.candidates[ai][ti];
            let mut fresh: Vec<&'a str> = Vec::new();
            let mut ok = true;
            for (term, v) in atom.terms.iter().zip(&t.values) {
                match term {
                    Term::Const(c) => ok = c == v,
                    Term::Var(x) => match self.binding.get(x.as_str()) {
                        Some(b) => ok = *b == v,
                        None => {
                            ok = self.selected.get(x.as_str()).is_none_or(|s| *s == v);
                            if ok {
                                self.binding.insert(x.as_str(), v);
                                fresh.push(x.as_str());
                            }
                        }
                    },
                }
                if !ok {
                    break;
                }
            }
            if ok {
                self.chosen[ai] = Some(&t.annotation);
                self.run(depth + 1);
                self.chosen[ai] = None;
            }
            for x in fresh {
                self.binding.remove(x);
            }
        }
    }
}
