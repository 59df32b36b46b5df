use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::provgraph::{ExampleRow, ProvenanceGraph};
use crate::relcore::{AnnotatedTuple, Annotation, Instance};

/// Fills the gaps of a joinless explanation with bridging tuples.
///
/// Two disconnected components are bridged when one holds `t_i`, the other
/// `t_j`, their relations are at schema distance two through a pure-join
/// relation `R_v`, and some `t_v` of `R_v` carries `t_i`'s and `t_j`'s values
/// on the linking attributes. Every such `t_v` is added. Returns the
/// completed explanation; a connected explanation comes back unchanged.
pub fn complete_joinless(row: &ExampleRow, d: &Instance) -> Result<BTreeSet<Annotation>> {
    let schema = d.schema();
    let sg = schema.graph();
    let mut explanation = row.explanation.clone();

    loop {
        let p = ProvenanceGraph::build(&explanation, d)?;
        let components = p.connected_components();
        if components.len() <= 1 {
            return Ok(explanation);
        }
        let mut added = BTreeSet::new();
        for (x, cx) in components.iter().enumerate() {
            for cy in &components[x + 1..] {
                for a in cx {
                    for b in cy {
                        let ta = d.get(a.as_str())?;
                        let tb = d.get(b.as_str())?;
                        if sg.distance(&ta.relation, &tb.relation) != Some(2) {
                            continue;
                        }
                        for t in bridges(ta, tb, d) {
                            if !explanation.contains(&t.annotation) {
                                added.insert(t.annotation.clone());
                            }
                        }
                    }
                }
            }
        }
        if added.is_empty() {
            return Err(stuck(&components, d));
        }
        explanation.extend(added);
    }
}

/// Tuples of pure-join relations adjacent to both `ta` and `tb` that agree
/// with `ta` on one link and with `tb` on another.
fn bridges<'a>(ta: &AnnotatedTuple, tb: &AnnotatedTuple, d: &'a Instance) -> Vec<&'a AnnotatedTuple> {
    let schema = d.schema();
    let sg = schema.graph();
    let mut out = Vec::new();
    for rv in sg.relations() {
        if !schema.is_pure_join(rv) {
            continue;
        }
        let to_a: Vec<(usize, usize)> = sg
            .links_of(rv)
            .filter(|(_, (r, _))| *r == ta.relation)
            .map(|((_, vi), (_, ai))| (vi, ai))
            .collect();
        let to_b: Vec<(usize, usize)> = sg
            .links_of(rv)
            .filter(|(_, (r, _))| *r == tb.relation)
            .map(|((_, vi), (_, bi))| (vi, bi))
            .collect();
        if to_a.is_empty() || to_b.is_empty() {
            continue;
        }
        for tv in d.tuples_of(rv) {
            let hit = to_a.iter().any(|&(vi, ai)| {
                to_b.iter()
                    .any(|&(vj, bj)| vi != vj && tv.values[vi] == ta.values[ai] && tv.values[vj] == tb.values[bj])
            });
            if hit {
                out.push(tv);
            }
        }
    }
    out
}

/// Components within schema distance two of each other that still could not
/// be bridged make the explanation incompletable; components further apart
/// are outside the joinless fragment.
fn stuck(components: &[BTreeSet<Annotation>], d: &Instance) -> Error {
    let sg = d.schema().graph();
    let relations: Vec<BTreeSet<&str>> = components
        .iter()
        .map(|c| {
            c.iter()
                .filter_map(|a| d.tuple(a.as_str()))
                .map(|t| t.relation.as_str())
                .collect()
        })
        .collect();
    let near = |x: usize, y: usize| {
        relations[x].iter().any(|ra| {
            relations[y]
                .iter()
                .any(|rb| sg.distance(ra, rb).is_some_and(|k| k <= 2))
        })
    };
    // Components reachable from the first through near pairs.
    let mut reached = vec![false; components.len()];
    reached[0] = true;
    let mut stack = vec![0];
    while let Some(x) = stack.pop() {
        for y in 0..components.len() {
            if !reached[y] && near(x, y) {
                reached[y] = true;
                stack.push(y);
            }
        }
    }
    let describe = |c: &BTreeSet<Annotation>| c.iter().map(Annotation::as_str).collect::<Vec<_>>().join(", ");
    if reached.iter().all(|r| *r) {
        Error::Incompletable(format!(
            "no tuple joins the components {}",
            components
                .iter()
                .map(|c| format!("{{{}}}", describe(c)))
                .collect::<Vec<_>>()
                .join(" and ")
        ))
    } else {
        let far = reached.iter().position(|r| !r).unwrap();
        Error::UnsupportedFragment(format!(
            "{{{}}} is more than one relation away from {{{}}}",
            describe(&components[far]),
            describe(&components[0])
        ))
    }
}
