//! Provenance graphs of the running example's rows: one node per
//! explanation tuple, an edge wherever two tuples share a constant, with
//! the attribute pairs that witness it.
//!
//! Run with `cargo run --example provenance_graph`.

use prov_qbe::demo;
use prov_qbe::provgraph::ProvenanceGraph;

fn main() -> prov_qbe::Result<()> {
    let d = demo::running_instance();
    for (which, ex) in [("full", demo::running_full(&d)), ("partial", demo::running_partial(&d))] {
        for (k, row) in ex.rows().iter().enumerate() {
            let p = ProvenanceGraph::build(&row.explanation, &d)?;
            println!(
                "{which} row {} {}: {} nodes, {} edges, {} component(s)",
                k + 1,
                row.output,
                p.node_count(),
                p.edge_count(),
                p.connected_components().len()
            );
            for (a, b, witnesses) in p.edges() {
                let (ta, tb) = (p.tuple(a.as_str()).unwrap(), p.tuple(b.as_str()).unwrap());
                let how: Vec<String> = witnesses
                    .iter()
                    .map(|w| {
                        let an = d.schema().relation(&ta.relation).unwrap().attr_name(w.left);
                        let bn = d.schema().relation(&tb.relation).unwrap().attr_name(w.right);
                        format!("{}.{an} = {}.{bn} = {}", ta.relation, tb.relation, w.value)
                    })
                    .collect();
                println!("  {a} - {b}: {}", how.join("; "));
            }
        }
    }
    Ok(())
}
