//! Embedded relational model: schemas, annotated instances, conjunctive
//! queries and their evaluation with lineage tracking.

mod datalog;
mod eval;
mod instance;
mod query;
mod schema;
mod sql;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use eval::{evaluate, lineage, Assignment, Evaluation};
pub use instance::{AnnotatedTuple, Instance};
pub use query::{Atom, ConjunctiveQuery, QueryStyle, Selection, Term};
pub use schema::{Attribute, ForeignKey, RelationDecl, Schema, SchemaGraph, SchemaLink};
pub(crate) use sql::fresh_name as fresh_var;

/// Declared type of an attribute.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueType {
    Text,
    Integer,
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueType::Text => f.write_str("text"),
            ValueType::Integer => f.write_str("integer"),
        }
    }
}

/// A typed constant. Equality is type-sensitive: `Int(4) != Text("4")`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Text(String),
}

impl Value {
    pub fn value_type(&self) -> ValueType {
        match self {
            Value::Int(_) => ValueType::Integer,
            Value::Text(_) => ValueType::Text,
        }
    }

    /// Canonical text of the constant, as a user would type it.
    pub fn as_text(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Text(s) => s.clone(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_owned())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

/// Identifier of an input tuple, e.g. `a2`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Annotation(String);

impl Annotation {
    pub fn new(s: impl Into<String>) -> Self {
        Annotation(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Annotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Annotation {
    fn from(s: &str) -> Self {
        Annotation(s.to_owned())
    }
}

impl From<String> for Annotation {
    fn from(s: String) -> Self {
        Annotation(s)
    }
}

impl std::borrow::Borrow<str> for Annotation {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// One output row of a query.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OutputTuple(pub Vec<Value>);

impl OutputTuple {
    pub fn new(values: Vec<Value>) -> Self {
        OutputTuple(values)
    }

    pub fn values(&self) -> &[Value] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub(crate) fn display_strings(&self) -> Vec<String> {
        self.0.iter().map(Value::as_text).collect()
    }
}

impl fmt::Display for OutputTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

impl<V: Into<Value>> FromIterator<V> for OutputTuple {
    fn from_iter<I: IntoIterator<Item = V>>(iter: I) -> Self {
        OutputTuple(iter.into_iter().map(Into::into).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_type_constants_never_equal() {
        assert_ne!(Value::Int(4), Value::Text("4".into()));
        assert_eq!(Value::Int(4).as_text(), Value::Text("4".into()).as_text());
    }

    #[test]
    fn value_json_is_untagged() {
        let v: Vec<Value> = serde_json::from_str(r#"[4, "Alice"]"#).unwrap();
        assert_eq!(v, vec![Value::Int(4), Value::from("Alice")]);
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"[4,"Alice"]"#);
    }
}
