use std::collections::BTreeSet;

use crate::joingraph::Homomorphism;
use crate::relcore::{ConjunctiveQuery, Instance, Selection, Value};

/// Adds `var = c` for every variable that takes the single value `c` across
/// all homomorphisms of all rows, unless the variable is projected or joins
/// two slots. Homomorphisms are read as assignments of `q`'s atoms.
pub fn infer_selections(q: &ConjunctiveQuery, homomorphisms: &[Vec<Homomorphism>], d: &Instance) -> ConjunctiveQuery {
    let occ = q.occurrences();
    let head: BTreeSet<&str> = q.head.iter().map(String::as_str).collect();
    let mut out = q.clone();
    for var in q.variables() {
        let slots = &occ[var];
        if head.contains(var) || slots.len() != 1 || q.selections.iter().any(|s| s.var == var) {
            continue;
        }
        let (atom, attr) = slots[0];
        let values: BTreeSet<&Value> = homomorphisms
            .iter()
            .flatten()
            .filter_map(|h| d.tuple(h.map[atom].as_str()))
            .map(|t| &t.values[attr])
            .collect();
        if values.len() == 1 {
            let value = values.into_iter().next().unwrap().clone();
            out.selections.push(Selection::new(var, value));
        }
    }
    out
}
