//! The candidate join graphs tried for a small example, in stream order,
//! with the first one whose homomorphisms cover every row.
//!
//! The single row says Alice is an answer because she wrote publication X
//! together with Carol. Both author tuples and both writes tuples must be
//! covered, so no graph with one author node works and the stream moves on
//! to self-joins.
//!
//! Run with `cargo run --example candidate_enumeration`.

use prov_qbe::demo;
use prov_qbe::infer::{enumerate_candidate_graphs, infer_projection, SizeBounds};
use prov_qbe::joingraph::find_cover;
use prov_qbe::provgraph::{ExampleRow, ProvExample, ProvenanceGraph};
use prov_qbe::relcore::Value;

fn main() -> prov_qbe::Result<()> {
    let d = demo::running_instance();
    let ex = ProvExample::new(
        vec![ExampleRow::new(
            ["a2", "w1", "p1", "w4", "a1"],
            [Value::from("Alice")].into_iter().collect(),
        )],
        &d,
    )?;
    let graphs: Vec<ProvenanceGraph> = ex
        .rows()
        .iter()
        .map(|r| ProvenanceGraph::build(&r.explanation, &d))
        .collect::<prov_qbe::Result<_>>()?;
    let proj = infer_projection(&ex, &d)?;
    let mut bounds = SizeBounds::of(&ex, &d);
    println!("size bounds {}..={}", bounds.min_nodes, bounds.max_nodes);
    bounds.max_nodes = bounds.max_nodes.min(5);
    let mut stream = enumerate_candidate_graphs(&graphs, &d, &proj, bounds);
    let mut tried = 0;
    while let Some(batch) = stream.next_batch() {
        println!(
            "size {} over {:?}: {} candidate(s)",
            batch.size,
            batch.relations,
            batch.graphs.len()
        );
        for g in &batch.graphs {
            tried += 1;
            let covers = ex
                .rows()
                .iter()
                .zip(&graphs)
                .all(|(r, p)| find_cover(g, p, &r.output).is_some());
            if covers {
                println!(
                    "first consistent after {tried} candidate(s): {}",
                    g.to_query(d.schema())?.to_datalog()
                );
                return Ok(());
            }
        }
    }
    println!("nothing consistent within {} atoms", bounds.max_nodes);
    Ok(())
}
