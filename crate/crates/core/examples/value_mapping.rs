//! Mapping free-form values to tuples: exact matches, a misspelling, a
//! number close to a stored year, and a value nothing resembles.
//!
//! Run with `cargo run --example value_mapping`.

use prov_qbe::demo;
use prov_qbe::valuemap::ValueMapper;

fn main() {
    let d = demo::running_instance();
    let mapper = ValueMapper::default();
    let mut probes = demo::first_row_values();
    probes.extend(["sigmd", "2013", "Qwxyzvk"].map(String::from));
    for v in &probes {
        match mapper.best_match(v, &d) {
            Some(m) if m.score >= mapper.threshold => {
                let attr = d.schema().relation(&m.relation).unwrap().attr_name(m.attr_index);
                let kind = if m.exact { "exact" } else { "fuzzy" };
                let ties = if m.ties > 0 {
                    format!(", {} tie(s)", m.ties)
                } else {
                    String::new()
                };
                println!(
                    "{v:>8} -> {} via {}.{attr}, score {:.4} ({kind}{ties})",
                    m.annotation, m.relation, m.score
                );
            }
            other => println!("{v:>8} -> unmatched (best {:.4})", other.map_or(0.0, |m| m.score)),
        }
    }
}
