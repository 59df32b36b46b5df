use std::collections::BTreeMap;
use std::sync::Arc;

use super::{Annotation, Schema, Value};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnotatedTuple {
    pub annotation: Annotation,
    pub relation: String,
    pub values: Vec<Value>,
}

impl AnnotatedTuple {
    pub fn new(annotation: impl Into<Annotation>, relation: impl Into<String>, values: Vec<Value>) -> Self {
        AnnotatedTuple {
            annotation: annotation.into(),
            relation: relation.into(),
            values,
        }
    }
}

/// An annotated database instance. Tuples iterate in annotation order.
#[derive(Clone, Debug)]
pub struct Instance {
    schema: Arc<Schema>,
    tuples: BTreeMap<Annotation, AnnotatedTuple>,
    by_relation: BTreeMap<String, Vec<Annotation>>,
}

impl Instance {
    pub fn new(schema: impl Into<Arc<Schema>>, tuples: Vec<AnnotatedTuple>) -> Result<Self> {
        let schema = schema.into();
        let mut map = BTreeMap::new();
        for t in tuples {
            let rel = schema.relation(&t.relation).ok_or_else(|| {
                Error::InvalidInstance(format!(
                    "tuple `{}` belongs to unknown relation `{}`",
                    t.annotation, t.relation
                ))
            })?;
            if t.values.len() != rel.arity() {
                return Err(Error::InvalidInstance(format!(
                    "tuple `{}` has {} values, `{}` has arity {}",
                    t.annotation,
                    t.values.len(),
                    rel.name,
                    rel.arity()
                )));
            }
            for (v, attr) in t.values.iter().zip(&rel.attributes) {
                if v.value_type() != attr.ty {
                    return Err(Error::InvalidInstance(format!(
                        "tuple `{}`: `{}.{}` expects {}, got `{v}`",
                        t.annotation, rel.name, attr.name, attr.ty
                    )));
                }
            }
            if map.contains_key(&t.annotation) {
                return Err(Error::InvalidInstance(format!(
                    "duplicate annotation `{}`",
                    t.annotation
                )));
            }
            map.insert(t.annotation.clone(), t);
        }
        Ok(Self::from_checked(schema, map))
    }

    fn from_checked(schema: Arc<Schema>, tuples: BTreeMap<Annotation, AnnotatedTuple>) -> Self {
        let mut by_relation: BTreeMap<String, Vec<Annotation>> = BTreeMap::new();
        for t in tuples.values() {
            by_relation
                .entry(t.relation.clone())
                .or_default()
                .push(t.annotation.clone());
        }
        Instance {
            schema,
            tuples,
            by_relation,
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn schema_arc(&self) -> Arc<Schema> {
        Arc::clone(&self.schema)
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn tuple(&self, annotation: &str) -> Option<&AnnotatedTuple> {
        self.tuples.get(annotation)
    }

    pub fn get(&self, annotation: &str) -> Result<&AnnotatedTuple> {
        self.tuple(annotation)
            .ok_or_else(|| Error::MissingTuple(Annotation::from(annotation)))
    }

    pub fn contains(&self, annotation: &str) -> bool {
        self.tuples.contains_key(annotation)
    }

    /// All tuples in annotation order.
    pub fn tuples(&self) -> impl Iterator<Item = &AnnotatedTuple> {
        self.tuples.values()
    }

    /// Tuples of one relation in annotation order.
    pub fn tuples_of<'a>(&'a self, relation: &str) -> impl Iterator<Item = &'a AnnotatedTuple> + 'a {
        self.by_relation
            .get(relation)
            .into_iter()
            .flatten()
            .map(|a| &self.tuples[a])
    }

    /// Relations in schema declaration order, tuples by annotation within each.
    pub fn tuples_in_schema_order(&self) -> impl Iterator<Item = &AnnotatedTuple> {
        self.schema.relations().iter().flat_map(|r| self.tuples_of(&r.name))
    }

    /// The sub-instance holding only the given tuples.
    pub fn restrict<'a, I>(&self, annotations: I) -> Result<Instance>
    where
        I: IntoIterator<Item = &'a Annotation>,
    {
        let mut tuples = BTreeMap::new();
        for a in annotations {
            let t = self.get(a.as_str())?;
            tuples.insert(a.clone(), t.clone());
        }
        Ok(Self::from_checked(Arc::clone(&self.schema), tuples))
    }
}
