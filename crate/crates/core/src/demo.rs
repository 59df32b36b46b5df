//! Bundled datasets.
//!
//! The *running* dataset is the small bibliographic instance with org,
//! author, pub, writes, conf, domain_conf and domain, together with the
//! two-row example (SIGMOD, Alice) / (CIKM, Bob) in full, partial and value
//! form. The *mas* dataset is a larger synthetic instance in the same style
//! with nine reference queries.

use crate::io::{self, Explanation, RawRow};
use crate::provgraph::ProvExample;
use crate::relcore::{ConjunctiveQuery, Instance, Schema};

pub const RUNNING_SCHEMA: &str = include_str!("../fixtures/running/schema.json");
pub const RUNNING_INSTANCE: &str = include_str!("../fixtures/running/instance.json");
pub const RUNNING_FULL: &str = include_str!("../fixtures/running/full.json");
pub const RUNNING_PARTIAL: &str = include_str!("../fixtures/running/partial.json");
pub const RUNNING_VALUES: &str = include_str!("../fixtures/running/values.json");
pub const INTENDED_QUERY: &str = include_str!("../fixtures/running/intended.dl");
pub const DOUBLED_QUERY: &str = include_str!("../fixtures/running/doubled.dl");
pub const NO_DOMAIN_QUERY: &str = include_str!("../fixtures/running/no_domain.dl");

pub const MAS_SCHEMA: &str = include_str!("../fixtures/mas/schema.json");
pub const MAS_INSTANCE: &str = include_str!("../fixtures/mas/instance.json");
pub const MAS_QUERIES: &str = include_str!("../fixtures/mas/queries.sql");

pub fn running_schema() -> Schema {
    io::parse_schema(RUNNING_SCHEMA).expect("bundled schema parses")
}

pub fn running_instance() -> Instance {
    io::parse_instance(RUNNING_INSTANCE, running_schema()).expect("bundled instance parses")
}

fn example(text: &str, d: &Instance) -> ProvExample {
    let rows = io::parse_example(text).expect("bundled example parses");
    io::example_from_tuple_ids(&rows, d).expect("bundled example is valid")
}

/// Rows explained by their complete lineage.
pub fn running_full(d: &Instance) -> ProvExample {
    example(RUNNING_FULL, d)
}

/// The same rows with the writes and domain_conf tuples left out.
pub fn running_partial(d: &Instance) -> ProvExample {
    example(RUNNING_PARTIAL, d)
}

/// The same rows explained by free-form values.
pub fn running_values() -> Vec<RawRow> {
    io::parse_example(RUNNING_VALUES).expect("bundled example parses")
}

/// Values of the first row of [`running_values`].
pub fn first_row_values() -> Vec<String> {
    match &running_values()[0].explanation {
        Explanation::Values(v) => v.clone(),
        Explanation::TupleIds(_) => unreachable!("value rows"),
    }
}

pub fn intended_query() -> ConjunctiveQuery {
    ConjunctiveQuery::parse_datalog(INTENDED_QUERY).expect("bundled query parses")
}

/// Consistent but not minimal: two writes/pub pairs where one suffices.
pub fn doubled_query() -> ConjunctiveQuery {
    ConjunctiveQuery::parse_datalog(DOUBLED_QUERY).expect("bundled query parses")
}

pub fn mas_schema() -> Schema {
    io::parse_schema(MAS_SCHEMA).expect("bundled schema parses")
}

pub fn mas_instance() -> Instance {
    io::parse_instance(MAS_INSTANCE, mas_schema()).expect("bundled instance parses")
}

/// The reference queries, numbered from 1, with range predicates replaced by
/// equalities.
pub fn mas_queries(schema: &Schema) -> Vec<(usize, ConjunctiveQuery)> {
    mas_query_texts()
        .into_iter()
        .map(|(n, sql)| {
            (
                n,
                ConjunctiveQuery::parse_sql(&sql, schema).expect("bundled query parses"),
            )
        })
        .collect()
}

/// Query texts of `queries.sql`: one statement per non-comment line, each
/// preceded by a `-- N` comment.
pub fn mas_query_texts() -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut number = None;
    for line in MAS_QUERIES.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("--") {
            if let Some(n) = rest.split_whitespace().next().and_then(|w| w.parse().ok()) {
                number = Some(n);
            }
        } else if !line.is_empty() {
            out.push((number.take().unwrap_or(out.len() + 1), line.to_owned()));
        }
    }
    out
}
