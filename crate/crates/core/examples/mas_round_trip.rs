//! Round trip on the synthetic bibliographic instance: evaluate each
//! reference query, keep two of its outputs together with their lineage as a
//! prov-example, and infer a query back from it.
//!
//! Run with `cargo run --release --example mas_round_trip`.

use std::time::Instant;

use prov_qbe::demo;
use prov_qbe::infer::{self, Mode};
use prov_qbe::provgraph::{ExampleRow, ProvExample};
use prov_qbe::relcore::{evaluate, lineage};

fn main() -> prov_qbe::Result<()> {
    let d = demo::mas_instance();
    println!("instance: {} tuples", d.len());
    for (n, q) in demo::mas_queries(d.schema()) {
        let outputs: Vec<_> = evaluate(&q, &d)?.into_keys().take(2).collect();
        let rows = outputs
            .iter()
            .map(|o| Ok(ExampleRow::new(lineage(&q, &d, o)?, o.clone())))
            .collect::<prov_qbe::Result<Vec<_>>>()?;
        let ex = ProvExample::new(rows, &d)?;
        let start = Instant::now();
        let result = infer::infer_query(&ex, &d, Mode::Full)?;
        let elapsed = start.elapsed();
        let back = evaluate(&result.query, &d)?;
        let covered = outputs.iter().all(|o| back.contains_key(o));
        println!(
            "query {n}: {} atoms in, {} atoms out, outputs reproduced: {covered}, {:.1} ms",
            q.atoms.len(),
            result.query.atoms.len(),
            elapsed.as_secs_f64() * 1e3
        );
        println!("  original: {}", q.to_datalog());
        println!("  inferred: {}", result.query.to_datalog());
        for (k, row) in ex.rows().iter().enumerate() {
            println!(
                "  row {}: {} explained by {} tuples",
                k + 1,
                row.output,
                row.explanation.len()
            );
        }
    }
    Ok(())
}
