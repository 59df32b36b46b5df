//! Query inference from prov-examples.
//!
//! The pipeline infers the projected attributes, enumerates candidate join
//! graphs in growing size order and returns the first one whose
//! homomorphisms cover the provenance graph of every row, with equality
//! selections for single-valued attributes. In joinless mode each
//! explanation is first completed with the pure-join tuples it omits.

mod candidates;
mod complete;
mod projection;
mod selections;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rayon::prelude::*;

pub use candidates::{enumerate_candidate_graphs, CandidateBatch, CandidateGraphs, EdgeVocabulary};
pub use complete::complete_joinless;
pub use projection::{infer_projection, ProjectionCandidates, SizeBounds};
pub use selections::infer_selections;

use crate::error::{Error, Result};
use crate::joingraph::{enumerate_homomorphisms, find_cover, greedy_cover, Cover, JoinGraph};
use crate::provgraph::{ExampleRow, ProvExample, ProvenanceGraph};
use crate::relcore::{lineage, Annotation, ConjunctiveQuery, Instance};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    /// Explanations are complete lineage.
    #[default]
    Full,
    /// Explanations may omit pure-join tuples.
    Joinless,
}

/// Wall-clock time per pipeline stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StageTimings {
    pub value_mapping: Duration,
    pub completion: Duration,
    pub inference: Duration,
}

impl StageTimings {
    /// `(stage name, duration)` in pipeline order.
    pub fn stages(&self) -> [(&'static str, Duration); 3] {
        [
            ("value-mapping", self.value_mapping),
            ("completion", self.completion),
            ("inference", self.inference),
        ]
    }
}

#[derive(Clone, Debug)]
pub struct InferenceConfig {
    pub mode: Mode,
    /// Caps the size bound derived from the example.
    pub max_nodes: Option<usize>,
    /// Check the candidates of one relation multiset on the rayon pool.
    pub parallel: bool,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        InferenceConfig {
            mode: Mode::Full,
            max_nodes: None,
            parallel: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct InferenceResult {
    pub query: ConjunctiveQuery,
    pub graph: JoinGraph,
    /// The example the query was inferred from, after completion.
    pub example: ProvExample,
    /// One cover per row.
    pub covers: Vec<Cover>,
    /// Per row, the tuples added by joinless completion.
    pub completed_tuples: Vec<BTreeSet<Annotation>>,
    pub timings: StageTimings,
}

pub fn infer_query(ex: &ProvExample, d: &Instance, mode: Mode) -> Result<InferenceResult> {
    infer_query_with(
        ex,
        d,
        &InferenceConfig {
            mode,
            ..InferenceConfig::default()
        },
    )
}

pub fn infer_query_with(ex: &ProvExample, d: &Instance, cfg: &InferenceConfig) -> Result<InferenceResult> {
    let mut timings = StageTimings::default();

    let start = Instant::now();
    let (example, completed_tuples) = match cfg.mode {
        Mode::Full => (ex.clone(), vec![BTreeSet::new(); ex.rows().len()]),
        Mode::Joinless => complete_example(ex, d)?,
    };
    timings.completion = start.elapsed();

    let start = Instant::now();
    let proj = infer_projection(&example, d)?;
    let mut bounds = SizeBounds::of(&example, d);
    if let Some(cap) = cfg.max_nodes {
        bounds.max_nodes = bounds.max_nodes.min(cap);
    }
    let graphs = provenance_graphs(&example, d)?;
    if !same_relations(&graphs) {
        return Err(Error::NoConsistentQuery {
            max_nodes: bounds.max_nodes,
        });
    }
    let (graph, covers) =
        first_covering(&example, &graphs, d, &proj, bounds, cfg.parallel).ok_or(Error::NoConsistentQuery {
            max_nodes: bounds.max_nodes,
        })?;
    let base = graph.to_query(d.schema())?;
    let homs: Vec<_> = example
        .rows()
        .iter()
        .zip(&graphs)
        .map(|(row, p)| enumerate_homomorphisms(&graph, p, &row.output))
        .collect();
    let query = infer_selections(&base, &homs, d);
    timings.inference = start.elapsed();

    Ok(InferenceResult {
        query,
        graph,
        example,
        covers,
        completed_tuples,
        timings,
    })
}

/// Completes every row; returns the completed example and the added tuples
/// per row.
pub fn complete_example(ex: &ProvExample, d: &Instance) -> Result<(ProvExample, Vec<BTreeSet<Annotation>>)> {
    let mut rows = Vec::with_capacity(ex.rows().len());
    let mut added = Vec::with_capacity(ex.rows().len());
    for row in ex.rows() {
        let full = complete_joinless(row, d)?;
        added.push(full.difference(&row.explanation).cloned().collect());
        rows.push(ExampleRow {
            explanation: full,
            output: row.output.clone(),
        });
    }
    Ok((ProvExample::new(rows, d)?, added))
}

fn provenance_graphs(ex: &ProvExample, d: &Instance) -> Result<Vec<ProvenanceGraph>> {
    ex.rows()
        .iter()
        .map(|r| ProvenanceGraph::build(&r.explanation, d))
        .collect()
}

/// Homomorphisms only reach provenance nodes, so a graph covering every row
/// needs every row to use the same relations.
fn same_relations(graphs: &[ProvenanceGraph]) -> bool {
    let sets: Vec<BTreeSet<&str>> = graphs
        .iter()
        .map(|g| g.tuples().map(|t| t.relation.as_str()).collect())
        .collect();
    sets.windows(2).all(|w| w[0] == w[1])
}

fn covers_all(g: &JoinGraph, ex: &ProvExample, graphs: &[ProvenanceGraph]) -> Option<Vec<Cover>> {
    ex.rows()
        .iter()
        .zip(graphs)
        .map(|(row, p)| find_cover(g, p, &row.output))
        .collect()
}

/// The first candidate in stream order that covers every row.
fn first_covering(
    ex: &ProvExample,
    graphs: &[ProvenanceGraph],
    d: &Instance,
    proj: &ProjectionCandidates,
    bounds: SizeBounds,
    parallel: bool,
) -> Option<(JoinGraph, Vec<Cover>)> {
    let mut stream = enumerate_candidate_graphs(graphs, d, proj, bounds);
    while let Some(batch) = stream.next_batch() {
        let check = |g: &JoinGraph| covers_all(g, ex, graphs).map(|c| (g.clone(), c));
        let hit = if parallel {
            batch.graphs.par_iter().find_map_first(check)
        } else {
            batch.graphs.iter().find_map(check)
        };
        if hit.is_some() {
            return hit;
        }
    }
    None
}

/// A candidate graph with fewer than `below` nodes that covers every row of
/// `ex`, if one exists. `None` certifies that no query with a smaller join
/// graph (within the edge vocabulary) is consistent.
pub fn smaller_consistent_graph(ex: &ProvExample, d: &Instance, below: usize) -> Result<Option<JoinGraph>> {
    let proj = match infer_projection(ex, d) {
        Ok(p) => p,
        Err(Error::NoProjection { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let mut bounds = SizeBounds::of(ex, d);
    if below <= bounds.min_nodes {
        return Ok(None);
    }
    bounds.max_nodes = bounds.max_nodes.min(below - 1);
    let graphs = provenance_graphs(ex, d)?;
    if !same_relations(&graphs) {
        return Ok(None);
    }
    Ok(first_covering(ex, &graphs, d, &proj, bounds, true).map(|(g, _)| g))
}

/// No consistent candidate has fewer atoms than `q`.
pub fn is_minimal(q: &ConjunctiveQuery, ex: &ProvExample, d: &Instance) -> Result<bool> {
    Ok(smaller_consistent_graph(ex, d, q.atoms.len())?.is_none())
}

/// Whether `q` is consistent with every row, decided through covers of the
/// row's provenance graph. Disconnected explanations are completed with
/// bridging tuples first when possible; those tuples play the part of the
/// extra tuples a consistent query may use.
pub fn check_consistent(q: &ConjunctiveQuery, ex: &ProvExample, d: &Instance) -> Result<bool> {
    q.validate(d.schema())?;
    let g = JoinGraph::from_query(q);
    for row in ex.rows() {
        let mut p = ProvenanceGraph::build(&row.explanation, d)?;
        if !p.is_connected() {
            if let Ok(full) = complete_joinless(row, d) {
                p = ProvenanceGraph::build(&full, d)?;
            }
        }
        let homs: Vec<_> = enumerate_homomorphisms(&g, &p, &row.output)
            .into_iter()
            .filter(|h| h.to_assignment().check(q, d).as_ref() == Some(&row.output))
            .collect();
        if greedy_cover(homs, &p).is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Consistency decided on the whole database: some `S ⊆ d` makes `q`
/// produce each output with the explanation inside its lineage. Adding
/// tuples never removes outputs or shrinks lineage, so `S = d` decides it.
pub fn consistent_over_database(q: &ConjunctiveQuery, ex: &ProvExample, d: &Instance) -> Result<bool> {
    for row in ex.rows() {
        match lineage(q, d, &row.output) {
            Ok(lin) => {
                if !row.explanation.is_subset(&lin) {
                    return Ok(false);
                }
            }
            Err(Error::NotAnOutput(_)) => return Ok(false),
            Err(e) => return Err(e),
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demo;
    use crate::relcore::{OutputTuple, Selection, Value};

    fn out(vals: &[&str]) -> OutputTuple {
        vals.iter().map(|v| Value::from(*v)).collect()
    }

    fn row(ids: &[&str], o: &[&str]) -> ExampleRow {
        ExampleRow::new(ids.iter().copied(), out(o))
    }

    #[test]
    fn projection_of_the_running_example() {
        let d = demo::running_instance();
        let proj = infer_projection(&demo::running_full(&d), &d).unwrap();
        let expect = |r: &str, i: usize| BTreeSet::from([(r.to_owned(), i)]);
        assert_eq!(proj.per_position, vec![expect("conf", 1), expect("author", 1)]);
    }

    #[test]
    fn projection_fails_when_rows_disagree() {
        let d = demo::running_instance();
        let ex = ProvExample::new(vec![row(&["c2"], &["SIGMOD"]), row(&["a3"], &["Bob"])], &d).unwrap();
        assert!(matches!(
            infer_projection(&ex, &d),
            Err(Error::NoProjection { position: 0 })
        ));
    }

    #[test]
    fn size_bounds() {
        let d = demo::running_instance();
        let b = SizeBounds::of(&demo::running_full(&d), &d);
        assert_eq!((b.min_nodes, b.max_nodes), (7, 2 + 7 * 9));
    }

    #[test]
    fn completion_of_the_partial_rows() {
        let d = demo::running_instance();
        let (_, added) = complete_example(&demo::running_partial(&d), &d).unwrap();
        let set = |ids: &[&str]| ids.iter().map(|s| Annotation::from(*s)).collect::<BTreeSet<_>>();
        assert_eq!(added, vec![set(&["w1", "dc2"]), set(&["w3", "dc1"])]);
    }

    #[test]
    fn completion_is_idempotent() {
        let d = demo::running_instance();
        let (once, _) = complete_example(&demo::running_partial(&d), &d).unwrap();
        let (twice, added) = complete_example(&once, &d).unwrap();
        assert_eq!(once, twice);
        assert!(added.iter().all(BTreeSet::is_empty));
    }

    #[test]
    fn completion_failures() {
        let d = demo::running_instance();
        // org and conf are four relations apart.
        let far = row(&["o2", "c2"], &["TAU"]);
        assert!(matches!(
            complete_joinless(&far, &d),
            Err(Error::UnsupportedFragment(_))
        ));
        // Bob wrote no pub with wid 6.
        let unbridged = row(&["a3", "p1"], &["Bob"]);
        assert!(matches!(
            complete_joinless(&unbridged, &d),
            Err(Error::Incompletable(_))
        ));
    }

    #[test]
    fn single_conf_row_selects_its_key() {
        let d = demo::running_instance();
        let ex = ProvExample::new(vec![row(&["c2"], &["SIGMOD"])], &d).unwrap();
        let r = infer_query(&ex, &d, Mode::Full).unwrap();
        let q = &r.query;
        assert_eq!(q.atoms.len(), 1);
        assert_eq!(q.atoms[0].relation, "conf");
        let key = q.atoms[0].terms[0].as_var().unwrap();
        assert_eq!(q.atoms[0].terms[1].as_var(), Some(q.head[0].as_str()));
        assert_eq!(q.selections, vec![Selection::new(key, 11)]);
    }

    #[test]
    fn running_example_selections() {
        let d = demo::running_instance();
        let r = infer_query(&demo::running_full(&d), &d, Mode::Full).unwrap();
        let sel: BTreeSet<String> = r.query.selections.iter().map(|s| format!("{}", s.value)).collect();
        assert_eq!(sel, BTreeSet::from(["DB".to_owned(), "TAU".to_owned()]));
        assert!(r.graph.is_isomorphic(&JoinGraph::from_query(&demo::intended_query())));
    }

    #[test]
    fn joinless_matches_full_after_completion() {
        let d = demo::running_instance();
        let a = infer_query(&demo::running_partial(&d), &d, Mode::Joinless).unwrap();
        let b = infer_query(&demo::running_full(&d), &d, Mode::Full).unwrap();
        assert!(a.graph.is_isomorphic(&b.graph));
    }

    #[test]
    fn check_and_minimality() {
        let d = demo::running_instance();
        let ex = demo::running_full(&d);
        let intended = demo::intended_query();
        assert!(check_consistent(&intended, &ex, &d).unwrap());
        assert!(is_minimal(&intended, &ex, &d).unwrap());
        let doubled = demo::doubled_query();
        assert!(check_consistent(&doubled, &ex, &d).unwrap());
        assert!(!is_minimal(&doubled, &ex, &d).unwrap());
        let no_domain = ConjunctiveQuery::parse_datalog(demo::NO_DOMAIN_QUERY).unwrap();
        assert!(!check_consistent(&no_domain, &ex, &d).unwrap());
        assert!(consistent_over_database(&intended, &ex, &d).unwrap());
    }

    #[test]
    fn rows_over_different_relations_have_no_query() {
        let d = demo::running_instance();
        let ex = ProvExample::new(vec![row(&["c2"], &["SIGMOD"]), row(&["c1", "dc1"], &["CIKM"])], &d).unwrap();
        assert!(matches!(
            infer_query(&ex, &d, Mode::Full),
            Err(Error::NoConsistentQuery { .. })
        ));
    }
}
