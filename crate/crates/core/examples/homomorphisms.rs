//! Homomorphisms from a query's join graph into a provenance graph, and the
//! covers that decide consistency.
//!
//! Alice's row needs two homomorphisms (one per publication); the doubled query
//! covers it with a single non-injective one as well, and the query that
//! drops the domain atom cannot reach d1.
//!
//! Run with `cargo run --example homomorphisms`.

use prov_qbe::demo;
use prov_qbe::infer;
use prov_qbe::joingraph::{enumerate_homomorphisms, find_cover, JoinGraph};
use prov_qbe::provgraph::ProvenanceGraph;
use prov_qbe::relcore::ConjunctiveQuery;

fn main() -> prov_qbe::Result<()> {
    let d = demo::running_instance();
    let ex = demo::running_full(&d);
    let row = &ex.rows()[0];
    let p = ProvenanceGraph::build(&row.explanation, &d)?;
    let queries = [
        ("intended", demo::intended_query()),
        ("doubled", demo::doubled_query()),
        ("no domain", ConjunctiveQuery::parse_datalog(demo::NO_DOMAIN_QUERY)?),
    ];
    for (name, q) in &queries {
        let g = JoinGraph::from_query(q);
        println!("{name}: {}", q.to_datalog());
        for h in enumerate_homomorphisms(&g, &p, &row.output) {
            let image: Vec<&str> = h.map.iter().map(|a| a.as_str()).collect();
            println!("  homomorphism {image:?}");
        }
        match find_cover(&g, &p, &row.output) {
            Some(c) => println!("  covered by {} homomorphism(s)", c.homomorphisms.len()),
            None => println!("  no cover"),
        }
        println!("  consistent with both rows: {}", infer::check_consistent(q, &ex, &d)?);
    }
    Ok(())
}
