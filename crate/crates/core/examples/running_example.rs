//! The bibliographic running example end to end: infer a query from the
//! two fully explained rows, then from the joinless rows, then from rows
//! explained only by values.
//!
//! Run with `cargo run --example running_example`.

use prov_qbe::demo;
use prov_qbe::infer::{self, Mode};
use prov_qbe::io::Explanation;
use prov_qbe::provgraph::{ExampleRow, ProvExample};
use prov_qbe::relcore::QueryStyle;
use prov_qbe::valuemap::map_values;

fn main() -> prov_qbe::Result<()> {
    let d = demo::running_instance();

    let full = infer::infer_query(&demo::running_full(&d), &d, Mode::Full)?;
    println!("full lineage:\n  {}", full.query.to_datalog());
    println!("  as SQL: {}", full.query.render(QueryStyle::Sql, d.schema())?);

    let joinless = infer::infer_query(&demo::running_partial(&d), &d, Mode::Joinless)?;
    println!("joinless rows:\n  {}", joinless.query.to_datalog());
    for (k, added) in joinless.completed_tuples.iter().enumerate() {
        let ids: Vec<&str> = added.iter().map(|a| a.as_str()).collect();
        println!("  row {} completed with {ids:?}", k + 1);
    }

    let mut rows = Vec::new();
    for raw in demo::running_values() {
        let Explanation::Values(values) = &raw.explanation else {
            unreachable!()
        };
        let matches = map_values(values, &d)?;
        rows.push(ExampleRow::new(matches.into_iter().map(|m| m.annotation), raw.output));
    }
    let from_values = infer::infer_query(&ProvExample::new(rows, &d)?, &d, Mode::Joinless)?;
    println!("value rows:\n  {}", from_values.query.to_datalog());
    let t = from_values.timings;
    println!("  completion {:?}, inference {:?}", t.completion, t.inference);

    let same = full.graph.is_isomorphic(&joinless.graph) && full.graph.is_isomorphic(&from_values.graph);
    println!("all three join graphs isomorphic: {same}");
    Ok(())
}
