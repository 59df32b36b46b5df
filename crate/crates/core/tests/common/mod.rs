//! Random small databases and queries, plus brute-force oracles that share
//! no code with the library's evaluator or homomorphism search.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use prov_qbe::relcore::{
    AnnotatedTuple, Annotation, Atom, Attribute, ConjunctiveQuery, Instance, OutputTuple, RelationDecl, Schema,
    Selection, Term, Value, ValueType,
};
use rand::seq::SliceRandom;
use rand::Rng;

/// Up to `max_rel` integer relations of arity 1 to 3 and up to `max_tuples`
/// tuples drawn from a small domain so that joins actually happen.
pub fn random_instance(rng: &mut impl Rng, max_rel: usize, max_tuples: usize) -> Instance {
    let n_rel = rng.gen_range(1..=max_rel);
    let relations: Vec<RelationDecl> = (0..n_rel)
        .map(|r| {
            let arity = rng.gen_range(1..=3);
            RelationDecl::new(
                format!("r{r}"),
                (0..arity)
                    .map(|i| Attribute::new(format!("a{i}"), ValueType::Integer))
                    .collect(),
                vec![],
            )
        })
        .collect();
    let schema = Schema::new(relations, vec![]).unwrap();
    let domain = rng.gen_range(2..=4);
    let n_tuples = rng.gen_range(1..=max_tuples);
    let mut tuples = Vec::new();
    let mut seen = BTreeSet::new();
    for k in 0..n_tuples {
        let rel = &schema.relations()[rng.gen_range(0..n_rel)];
        let values: Vec<Value> = (0..rel.arity()).map(|_| Value::Int(rng.gen_range(0..domain))).collect();
        if seen.insert((rel.name.clone(), values.clone())) {
            tuples.push(AnnotatedTuple::new(format!("t{k}"), rel.name.clone(), values));
        }
    }
    Instance::new(schema, tuples).unwrap()
}

/// A query with up to `max_atoms` atoms over relations of `d`'s schema.
/// With `constants`, some terms are constants and some variables carry
/// selections.
pub fn random_query(rng: &mut impl Rng, d: &Instance, max_atoms: usize, constants: bool) -> ConjunctiveQuery {
    let rels = d.schema().relations();
    let n_atoms = rng.gen_range(1..=max_atoms);
    let pool = rng.gen_range(1..=4);
    let mut atoms = Vec::new();
    for _ in 0..n_atoms {
        let rel = rels.choose(rng).unwrap();
        let terms = (0..rel.arity())
            .map(|_| {
                if constants && rng.gen_bool(0.15) {
                    Term::Const(Value::Int(rng.gen_range(0..3)))
                } else {
                    Term::var(format!("x{}", rng.gen_range(0..pool)))
                }
            })
            .collect();
        atoms.push(Atom::new(rel.name.clone(), terms));
    }
    let mut vars: Vec<String> = atoms
        .iter()
        .flat_map(|a| a.terms.iter().filter_map(|t| t.as_var().map(str::to_owned)))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if vars.is_empty() {
        // All-constant bodies have nothing to project; make the first term a variable.
        atoms[0].terms[0] = Term::var("x0");
        vars.push("x0".into());
    }
    let head_len = rng.gen_range(1..=2.min(vars.len()));
    let head: Vec<String> = (0..head_len).map(|_| vars.choose(rng).unwrap().clone()).collect();
    let mut selections = Vec::new();
    if constants && rng.gen_bool(0.3) {
        selections.push(Selection::new(
            vars.choose(rng).unwrap().clone(),
            Value::Int(rng.gen_range(0..3)),
        ));
    }
    ConjunctiveQuery::new(head, atoms, selections)
}

/// Output of mapping atom `k` to `choice[k]`, if the mapping is an
/// assignment.
fn produce(q: &ConjunctiveQuery, choice: &[&AnnotatedTuple]) -> Option<OutputTuple> {
    let mut env: BTreeMap<&str, &Value> = BTreeMap::new();
    for (atom, t) in q.atoms.iter().zip(choice) {
        for (term, v) in atom.terms.iter().zip(&t.values) {
            match term {
                Term::Const(c) => {
                    if c != v {
                        return None;
                    }
                }
                Term::Var(x) => {
                    if let Some(prev) = env.insert(x, v) {
                        if prev != v {
                            return None;
                        }
                    }
                }
            }
        }
    }
    if q.selections.iter().any(|s| env.get(s.var.as_str()) != Some(&&s.value)) {
        return None;
    }
    Some(OutputTuple::new(
        q.head.iter().map(|h| env[h.as_str()].clone()).collect(),
    ))
}

/// Every map of atoms to same-relation tuples of `tuples`, with its output
/// when it is an assignment. Exhaustive over the product of per-atom
/// candidates.
pub fn brute_force(q: &ConjunctiveQuery, tuples: &[&AnnotatedTuple]) -> Vec<(Vec<Annotation>, OutputTuple)> {
    let per_atom: Vec<Vec<&AnnotatedTuple>> = q
        .atoms
        .iter()
        .map(|a| tuples.iter().copied().filter(|t| t.relation == a.relation).collect())
        .collect();
    let mut out = Vec::new();
    if per_atom.iter().any(Vec::is_empty) {
        return out;
    }
    let n = q.atoms.len();
    let mut idx = vec![0usize; n];
    loop {
        let choice: Vec<&AnnotatedTuple> = idx.iter().zip(&per_atom).map(|(&i, c)| c[i]).collect();
        if let Some(o) = produce(q, &choice) {
            out.push((choice.iter().map(|t| t.annotation.clone()).collect(), o));
        }
        let mut k = 0;
        while k < n {
            idx[k] += 1;
            if idx[k] < per_atom[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == n {
            return out;
        }
    }
}

/// Lineage by definition: the union of the tuples of every assignment that
/// produces `o`.
pub fn brute_lineage(q: &ConjunctiveQuery, d: &Instance, o: &OutputTuple) -> BTreeSet<Annotation> {
    let tuples: Vec<&AnnotatedTuple> = d.tuples().collect();
    brute_force(q, &tuples)
        .into_iter()
        .filter(|(_, out)| out == o)
        .flat_map(|(a, _)| a)
        .collect()
}

/// Consistency of `q` with `(explanation, o)` when assignments may only use
/// explanation tuples: the assignments producing `o` inside the explanation
/// must use every explanation tuple.
pub fn brute_consistent(
    q: &ConjunctiveQuery,
    d: &Instance,
    explanation: &BTreeSet<Annotation>,
    o: &OutputTuple,
) -> bool {
    let tuples: Vec<&AnnotatedTuple> = explanation.iter().map(|a| d.tuple(a.as_str()).unwrap()).collect();
    let used: BTreeSet<Annotation> = brute_force(q, &tuples)
        .into_iter()
        .filter(|(_, out)| out == o)
        .flat_map(|(a, _)| a)
        .collect();
    &used == explanation
}

/// An explanation for `q` drawn to hit both consistent and inconsistent
/// cases: the images of some assignments of one output, sometimes with an
/// extra tuple or with one tuple dropped, or a random tuple set.
pub fn random_explanation(
    rng: &mut impl Rng,
    q: &ConjunctiveQuery,
    d: &Instance,
) -> Option<(BTreeSet<Annotation>, OutputTuple)> {
    let all: Vec<&AnnotatedTuple> = d.tuples().collect();
    let results = brute_force(q, &all);
    let anns: Vec<Annotation> = all.iter().map(|t| t.annotation.clone()).collect();
    if results.is_empty() || rng.gen_bool(0.1) {
        // Unrelated tuples with an arbitrary output of the right arity.
        let k = rng.gen_range(1..=anns.len().min(4));
        let expl: BTreeSet<Annotation> = anns.choose_multiple(rng, k).cloned().collect();
        let o = OutputTuple::new((0..q.head.len()).map(|_| Value::Int(rng.gen_range(0..3))).collect());
        return Some((expl, o));
    }
    let (_, o) = results.choose(rng).unwrap().clone();
    let mine: Vec<&Vec<Annotation>> = results.iter().filter(|(_, out)| *out == o).map(|(a, _)| a).collect();
    let take = rng.gen_range(1..=mine.len());
    let mut expl: BTreeSet<Annotation> = mine
        .choose_multiple(rng, take)
        .flat_map(|a| a.iter().cloned())
        .collect();
    match rng.gen_range(0..4) {
        0 => {
            expl.insert(anns.choose(rng).unwrap().clone());
        }
        1 if expl.len() > 1 => {
            let drop = expl.iter().nth(rng.gen_range(0..expl.len())).unwrap().clone();
            expl.remove(&drop);
        }
        _ => {}
    }
    Some((expl, o))
}
