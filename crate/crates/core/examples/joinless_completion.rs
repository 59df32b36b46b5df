//! Completing explanations that leave out pure-join tuples. The partial
//! rows omit writes and domain_conf; completion bridges the gaps through
//! those relations. An explanation missing two relations in a row is
//! rejected.
//!
//! Run with `cargo run --example joinless_completion`.

use prov_qbe::demo;
use prov_qbe::infer::{complete_example, complete_joinless};
use prov_qbe::provgraph::ExampleRow;
use prov_qbe::relcore::Value;

fn main() -> prov_qbe::Result<()> {
    let d = demo::running_instance();
    let partial = demo::running_partial(&d);
    let (completed, added) = complete_example(&partial, &d)?;
    for ((before, after), extra) in partial.rows().iter().zip(completed.rows()).zip(&added) {
        let ids = |s: &std::collections::BTreeSet<_>| {
            s.iter()
                .map(|a: &prov_qbe::relcore::Annotation| a.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        println!(
            "{}: {} -> {} (added {})",
            before.output,
            ids(&before.explanation),
            ids(&after.explanation),
            ids(extra)
        );
    }
    print!("{}", prov_qbe::io::example_to_json(&completed));

    let gap = ExampleRow::new(
        ["o2", "a2", "c2", "dc2", "d1"],
        [Value::from("SIGMOD"), Value::from("Alice")].into_iter().collect(),
    );
    match complete_joinless(&gap, &d) {
        Ok(_) => println!("unexpectedly completed"),
        Err(e) => println!("without writes and pub: {e}"),
    }
    Ok(())
}
