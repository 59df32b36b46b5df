//! JSON file formats for schemas, instances and prov-examples.
//!
//! Every document carries `"version": 1`.
//!
//! ```json
//! {"version": 1,
//!  "relations": [{"name": "conf",
//!                 "attributes": [{"name": "cid", "type": "integer"},
//!                                {"name": "cname", "type": "text"}],
//!                 "key": ["cid"]}],
//!  "foreign_keys": [{"from": "pub.cid", "to": "conf.cid"}]}
//! ```
//!
//! Instances map relation names to rows keyed by attribute name plus an
//! `annotation`. Prov-example rows hold an `output` and either `tuple_ids`
//! or free-form `values`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::provgraph::{ExampleRow, ProvExample};
use crate::relcore::{
    AnnotatedTuple, Annotation, Attribute, ForeignKey, Instance, OutputTuple, RelationDecl, Schema, Value, ValueType,
};

pub const FORMAT_VERSION: u32 = 1;

fn check_version(what: &'static str, v: u32) -> Result<()> {
    if v != FORMAT_VERSION {
        return Err(Error::parse(
            what,
            format!("unsupported version {v}, expected {FORMAT_VERSION}"),
        ));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct SchemaDoc {
    version: u32,
    relations: Vec<RelationDoc>,
    #[serde(default)]
    foreign_keys: Vec<ForeignKeyDoc>,
}

#[derive(Serialize, Deserialize)]
struct RelationDoc {
    name: String,
    attributes: Vec<AttributeDoc>,
    #[serde(default)]
    key: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct AttributeDoc {
    name: String,
    #[serde(rename = "type")]
    ty: ValueType,
}

#[derive(Serialize, Deserialize)]
struct ForeignKeyDoc {
    from: String,
    to: String,
}

fn split_endpoint(s: &str) -> Result<(&str, &str)> {
    s.split_once('.')
        .ok_or_else(|| Error::parse("schema", format!("foreign key endpoint `{s}` is not `relation.attr`")))
}

pub fn parse_schema(text: &str) -> Result<Schema> {
    let doc: SchemaDoc = serde_json::from_str(text).map_err(|e| Error::parse("schema", e.to_string()))?;
    check_version("schema", doc.version)?;
    let relations = doc
        .relations
        .into_iter()
        .map(|r| {
            RelationDecl::new(
                r.name,
                r.attributes.into_iter().map(|a| Attribute::new(a.name, a.ty)).collect(),
                r.key,
            )
        })
        .collect();
    let fks = doc
        .foreign_keys
        .iter()
        .map(|fk| Ok(ForeignKey::new(split_endpoint(&fk.from)?, split_endpoint(&fk.to)?)))
        .collect::<Result<Vec<_>>>()?;
    Schema::new(relations, fks)
}

pub fn schema_to_json(schema: &Schema) -> String {
    let doc = SchemaDoc {
        version: FORMAT_VERSION,
        relations: schema
            .relations()
            .iter()
            .map(|r| RelationDoc {
                name: r.name.clone(),
                attributes: r
                    .attributes
                    .iter()
                    .map(|a| AttributeDoc {
                        name: a.name.clone(),
                        ty: a.ty,
                    })
                    .collect(),
                key: r.key.clone(),
            })
            .collect(),
        foreign_keys: schema
            .foreign_keys()
            .iter()
            .map(|fk| ForeignKeyDoc {
                from: format!("{}.{}", fk.from_relation, fk.from_attr),
                to: format!("{}.{}", fk.to_relation, fk.to_attr),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).unwrap() + "\n"
}

#[derive(Serialize, Deserialize)]
struct InstanceDoc {
    version: u32,
    relations: BTreeMap<String, Vec<serde_json::Map<String, serde_json::Value>>>,
}

fn json_to_value(v: &serde_json::Value, ty: ValueType, at: &str) -> Result<Value> {
    match (ty, v) {
        (ValueType::Integer, serde_json::Value::Number(n)) => n
            .as_i64()
            .map(Value::Int)
            .ok_or_else(|| Error::InvalidInstance(format!("{at}: `{n}` is not a 64-bit integer"))),
        (ValueType::Text, serde_json::Value::String(s)) => Ok(Value::Text(s.clone())),
        _ => Err(Error::InvalidInstance(format!("{at}: `{v}` is not of type {ty}"))),
    }
}

fn value_to_json(v: &Value) -> serde_json::Value {
    match v {
        Value::Int(i) => serde_json::Value::from(*i),
        Value::Text(s) => serde_json::Value::from(s.as_str()),
    }
}

pub fn parse_instance(text: &str, schema: Schema) -> Result<Instance> {
    let doc: InstanceDoc = serde_json::from_str(text).map_err(|e| Error::parse("instance", e.to_string()))?;
    check_version("instance", doc.version)?;
    let mut tuples = Vec::new();
    for (rel, rows) in &doc.relations {
        let decl = schema
            .relation(rel)
            .ok_or_else(|| Error::InvalidInstance(format!("unknown relation `{rel}`")))?;
        for (k, row) in rows.iter().enumerate() {
            let at = format!("{rel} row {}", k + 1);
            let annotation = row
                .get("annotation")
                .and_then(|a| a.as_str())
                .ok_or_else(|| Error::InvalidInstance(format!("{at}: missing `annotation`")))?;
            if let Some(extra) = row
                .keys()
                .find(|key| *key != "annotation" && decl.attr_index(key).is_none())
            {
                return Err(Error::InvalidInstance(format!("{at}: unknown attribute `{extra}`")));
            }
            let values = decl
                .attributes
                .iter()
                .map(|attr| {
                    let v = row
                        .get(&attr.name)
                        .ok_or_else(|| Error::InvalidInstance(format!("{at}: missing attribute `{}`", attr.name)))?;
                    json_to_value(v, attr.ty, &at)
                })
                .collect::<Result<Vec<_>>>()?;
            tuples.push(AnnotatedTuple::new(annotation, rel.clone(), values));
        }
    }
    Instance::new(schema, tuples)
}

pub fn instance_to_json(d: &Instance) -> String {
    let mut relations: BTreeMap<String, Vec<serde_json::Map<String, serde_json::Value>>> = BTreeMap::new();
    for rel in d.schema().relations() {
        let rows = d
            .tuples_of(&rel.name)
            .map(|t| {
                let mut m = serde_json::Map::new();
                m.insert("annotation".into(), t.annotation.as_str().into());
                for (a, v) in rel.attributes.iter().zip(&t.values) {
                    m.insert(a.name.clone(), value_to_json(v));
                }
                m
            })
            .collect();
        relations.insert(rel.name.clone(), rows);
    }
    let doc = InstanceDoc {
        version: FORMAT_VERSION,
        relations,
    };
    serde_json::to_string_pretty(&doc).unwrap() + "\n"
}

/// How a row explains its output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Explanation {
    TupleIds(Vec<Annotation>),
    Values(Vec<String>),
}

/// A prov-example row as written in a file, before value mapping.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawRow {
    pub output: OutputTuple,
    pub explanation: Explanation,
}

#[derive(Serialize, Deserialize)]
struct ExampleDoc {
    version: u32,
    rows: Vec<RowDoc>,
}

#[derive(Serialize, Deserialize)]
struct RowDoc {
    output: Vec<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tuple_ids: Option<Vec<Annotation>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<serde_json::Value>>,
}

/// Parses a prov-example document. Numbers in `values` are taken as their
/// decimal text.
pub fn parse_example(text: &str) -> Result<Vec<RawRow>> {
    let doc: ExampleDoc = serde_json::from_str(text).map_err(|e| Error::parse("example", e.to_string()))?;
    check_version("example", doc.version)?;
    doc.rows
        .into_iter()
        .enumerate()
        .map(|(k, r)| {
            let explanation = match (r.tuple_ids, r.values) {
                (Some(ids), None) => Explanation::TupleIds(ids),
                (None, Some(vals)) => Explanation::Values(
                    vals.into_iter()
                        .map(|v| match v {
                            serde_json::Value::String(s) => Ok(s),
                            serde_json::Value::Number(n) => Ok(n.to_string()),
                            other => Err(Error::parse(
                                "example",
                                format!("row {}: value `{other}` is neither text nor a number", k + 1),
                            )),
                        })
                        .collect::<Result<_>>()?,
                ),
                _ => {
                    return Err(Error::parse(
                        "example",
                        format!("row {} needs exactly one of `tuple_ids` and `values`", k + 1),
                    ))
                }
            };
            Ok(RawRow {
                output: OutputTuple(r.output),
                explanation,
            })
        })
        .collect()
}

/// Canonical document for a tuple-id example: rows in order, ids sorted.
pub fn example_to_json(ex: &ProvExample) -> String {
    let doc = ExampleDoc {
        version: FORMAT_VERSION,
        rows: ex
            .rows()
            .iter()
            .map(|r| RowDoc {
                output: r.output.0.clone(),
                tuple_ids: Some(r.explanation.iter().cloned().collect()),
                values: None,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).unwrap() + "\n"
}

/// Builds a prov-example from rows that all use `tuple_ids`.
pub fn example_from_tuple_ids(rows: &[RawRow], d: &Instance) -> Result<ProvExample> {
    let rows = rows
        .iter()
        .enumerate()
        .map(|(k, r)| match &r.explanation {
            Explanation::TupleIds(ids) => Ok(ExampleRow::new(ids.iter().cloned(), r.output.clone())),
            Explanation::Values(_) => Err(Error::InvalidExample(format!(
                "row {} is given as values; map them to tuples first",
                k + 1
            ))),
        })
        .collect::<Result<Vec<_>>>()?;
    ProvExample::new(rows, d)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(Error::from)
}

pub fn load_schema(path: &Path) -> Result<Schema> {
    parse_schema(&read(path)?)
}

pub fn load_instance(path: &Path, schema: Schema) -> Result<Instance> {
    parse_instance(&read(path)?, schema)
}

pub fn load_example(path: &Path) -> Result<Vec<RawRow>> {
    parse_example(&read(path)?)
}
