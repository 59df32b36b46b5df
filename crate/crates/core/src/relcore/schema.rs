use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use super::ValueType;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Attribute {
    pub name: String,
    pub ty: ValueType,
}

impl Attribute {
    pub fn new(name: impl Into<String>, ty: ValueType) -> Self {
        Attribute { name: name.into(), ty }
    }
}

/// A relation with an ordered, index-addressable attribute list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationDecl {
    pub name: String,
    pub attributes: Vec<Attribute>,
    pub key: Vec<String>,
}

impl RelationDecl {
    pub fn new(name: impl Into<String>, attributes: Vec<Attribute>, key: Vec<String>) -> Self {
        RelationDecl {
            name: name.into(),
            attributes,
            key,
        }
    }

    pub fn arity(&self) -> usize {
        self.attributes.len()
    }

    pub fn attr_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    pub fn attr_name(&self, index: usize) -> &str {
        &self.attributes[index].name
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ForeignKey {
    pub from_relation: String,
    pub from_attr: String,
    pub to_relation: String,
    pub to_attr: String,
}

impl ForeignKey {
    pub fn new(from: (&str, &str), to: (&str, &str)) -> Self {
        ForeignKey {
            from_relation: from.0.to_owned(),
            from_attr: from.1.to_owned(),
            to_relation: to.0.to_owned(),
            to_attr: to.1.to_owned(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schema {
    relations: Vec<RelationDecl>,
    foreign_keys: Vec<ForeignKey>,
    by_name: BTreeMap<String, usize>,
}

impl Schema {
    pub fn new(relations: Vec<RelationDecl>, foreign_keys: Vec<ForeignKey>) -> Result<Self> {
        let mut by_name = BTreeMap::new();
        for (i, rel) in relations.iter().enumerate() {
            if !is_identifier(&rel.name) {
                return Err(Error::InvalidSchema(format!(
                    "`{}` is not a valid relation name",
                    rel.name
                )));
            }
            if by_name.insert(rel.name.clone(), i).is_some() {
                return Err(Error::InvalidSchema(format!("duplicate relation `{}`", rel.name)));
            }
            let mut seen = HashSet::new();
            for attr in &rel.attributes {
                if !is_identifier(&attr.name) {
                    return Err(Error::InvalidSchema(format!(
                        "`{}.{}` is not a valid attribute name",
                        rel.name, attr.name
                    )));
                }
                if !seen.insert(attr.name.as_str()) {
                    return Err(Error::InvalidSchema(format!(
                        "duplicate attribute `{}.{}`",
                        rel.name, attr.name
                    )));
                }
            }
            for k in &rel.key {
                if rel.attr_index(k).is_none() {
                    return Err(Error::InvalidSchema(format!(
                        "key attribute `{}.{k}` is not declared",
                        rel.name
                    )));
                }
            }
        }
        let schema = Schema {
            relations,
            foreign_keys,
            by_name,
        };
        for fk in &schema.foreign_keys {
            for (rel, attr) in [(&fk.from_relation, &fk.from_attr), (&fk.to_relation, &fk.to_attr)] {
                if schema.attr_index(rel, attr).is_none() {
                    return Err(Error::InvalidSchema(format!(
                        "foreign key endpoint `{rel}.{attr}` does not exist"
                    )));
                }
            }
        }
        Ok(schema)
    }

    pub fn relations(&self) -> &[RelationDecl] {
        &self.relations
    }

    pub fn foreign_keys(&self) -> &[ForeignKey] {
        &self.foreign_keys
    }

    pub fn relation(&self, name: &str) -> Option<&RelationDecl> {
        self.by_name.get(name).map(|&i| &self.relations[i])
    }

    /// Position of the relation in declaration order.
    pub fn relation_position(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn attr_index(&self, relation: &str, attr: &str) -> Option<usize> {
        self.relation(relation)?.attr_index(attr)
    }

    /// Foreign keys as index-resolved links.
    pub fn links(&self) -> Vec<SchemaLink> {
        self.foreign_keys
            .iter()
            .map(|fk| SchemaLink {
                from: (
                    fk.from_relation.clone(),
                    self.attr_index(&fk.from_relation, &fk.from_attr).unwrap(),
                ),
                to: (
                    fk.to_relation.clone(),
                    self.attr_index(&fk.to_relation, &fk.to_attr).unwrap(),
                ),
            })
            .collect()
    }

    pub fn graph(&self) -> SchemaGraph {
        SchemaGraph::new(self)
    }

    /// A relation whose every attribute is a foreign-key endpoint, i.e. a
    /// table that only links other tables.
    pub fn is_pure_join(&self, relation: &str) -> bool {
        let Some(rel) = self.relation(relation) else {
            return false;
        };
        let linked: BTreeSet<usize> = self
            .links()
            .into_iter()
            .flat_map(|l| [l.from, l.to])
            .filter(|(r, _)| r == relation)
            .map(|(_, i)| i)
            .collect();
        rel.arity() > 0 && (0..rel.arity()).all(|i| linked.contains(&i))
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A foreign-key link between `(relation, attribute index)` endpoints.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SchemaLink {
    pub from: (String, usize),
    pub to: (String, usize),
}

impl SchemaLink {
    /// The endpoint on `relation`'s side and the opposite endpoint, if the
    /// link touches `relation`. Self-referencing links yield the `from` side.
    pub fn oriented_from(&self, relation: &str) -> Option<((&str, usize), (&str, usize))> {
        if self.from.0 == relation {
            Some(((self.from.0.as_str(), self.from.1), (self.to.0.as_str(), self.to.1)))
        } else if self.to.0 == relation {
            Some(((self.to.0.as_str(), self.to.1), (self.from.0.as_str(), self.from.1)))
        } else {
            None
        }
    }
}

/// Undirected graph over relations, one edge per foreign-key link.
#[derive(Clone, Debug)]
pub struct SchemaGraph {
    relations: Vec<String>,
    links: Vec<SchemaLink>,
}

impl SchemaGraph {
    fn new(schema: &Schema) -> Self {
        SchemaGraph {
            relations: schema.relations.iter().map(|r| r.name.clone()).collect(),
            links: schema.links(),
        }
    }

    pub fn relations(&self) -> &[String] {
        &self.relations
    }

    pub fn links(&self) -> &[SchemaLink] {
        &self.links
    }

    /// Links touching `relation`, oriented away from it.
    pub fn links_of<'a>(
        &'a self,
        relation: &'a str,
    ) -> impl Iterator<Item = ((&'a str, usize), (&'a str, usize))> + 'a {
        self.links.iter().filter_map(move |l| l.oriented_from(relation))
    }

    pub fn neighbors<'a>(&'a self, relation: &'a str) -> BTreeSet<&'a str> {
        self.links_of(relation).map(|(_, (r, _))| r).collect()
    }

    /// Length of the shortest relation path between `a` and `b`.
    pub fn distance(&self, a: &str, b: &str) -> Option<usize> {
        if a == b {
            return Some(0);
        }
        let mut seen = BTreeSet::from([a]);
        let mut queue = VecDeque::from([(a, 0usize)]);
        while let Some((rel, d)) = queue.pop_front() {
            for next in self.neighbors(rel) {
                if next == b {
                    return Some(d + 1);
                }
                if seen.insert(next) {
                    queue.push_back((next, d + 1));
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relcore::ValueType::*;

    fn rel(name: &str, attrs: &[&str]) -> RelationDecl {
        RelationDecl::new(
            name,
            attrs.iter().map(|a| Attribute::new(*a, Integer)).collect(),
            vec![],
        )
    }

    #[test]
    fn rejects_duplicates_and_dangling_keys() {
        assert!(Schema::new(vec![rel("r", &["a"]), rel("r", &["b"])], vec![]).is_err());
        assert!(Schema::new(vec![rel("r", &["a", "a"])], vec![]).is_err());
        let fk = ForeignKey::new(("r", "a"), ("s", "b"));
        assert!(Schema::new(vec![rel("r", &["a"])], vec![fk]).is_err());
    }

    #[test]
    fn distances_and_pure_joins() {
        let s = Schema::new(
            vec![rel("a", &["id", "x"]), rel("ab", &["aid", "bid"]), rel("b", &["id"])],
            vec![
                ForeignKey::new(("ab", "aid"), ("a", "id")),
                ForeignKey::new(("ab", "bid"), ("b", "id")),
            ],
        )
        .unwrap();
        let g = s.graph();
        assert_eq!(g.distance("a", "b"), Some(2));
        assert_eq!(g.distance("a", "ab"), Some(1));
        assert!(s.is_pure_join("ab"));
        assert!(!s.is_pure_join("a"));
        assert!(s.is_pure_join("b"));
    }
}
