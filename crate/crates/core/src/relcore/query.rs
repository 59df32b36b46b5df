use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{Schema, Value, ValueType};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(Value),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub relation: String,
    pub terms: Vec<Term>,
}

impl Atom {
    pub fn new(relation: impl Into<String>, terms: Vec<Term>) -> Self {
        Atom {
            relation: relation.into(),
            terms,
        }
    }

    /// Atom whose terms are all variables.
    pub fn vars(relation: impl Into<String>, vars: &[&str]) -> Self {
        Atom::new(relation, vars.iter().map(|v| Term::var(*v)).collect())
    }
}

/// Equality selection `var = value`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Selection {
    pub var: String,
    pub value: Value,
}

impl Selection {
    pub fn new(var: impl Into<String>, value: impl Into<Value>) -> Self {
        Selection {
            var: var.into(),
            value: value.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QueryStyle {
    Datalog,
    Sql,
}

/// A conjunctive query `name(head) :- atoms, selections`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConjunctiveQuery {
    pub name: String,
    pub head: Vec<String>,
    pub atoms: Vec<Atom>,
    pub selections: Vec<Selection>,
}

impl ConjunctiveQuery {
    pub fn new(head: Vec<String>, atoms: Vec<Atom>, selections: Vec<Selection>) -> Self {
        ConjunctiveQuery {
            name: "q".to_owned(),
            head,
            atoms,
            selections,
        }
    }

    pub fn parse_datalog(text: &str) -> Result<Self> {
        super::datalog::parse(text)
    }

    pub fn parse_sql(text: &str, schema: &Schema) -> Result<Self> {
        super::sql::parse(text, schema)
    }

    /// Parses either syntax, picking SQL when the text starts with `SELECT`.
    pub fn parse_any(text: &str, schema: &Schema) -> Result<Self> {
        let trimmed = text.trim_start();
        if trimmed.len() >= 6 && trimmed[..6].eq_ignore_ascii_case("select") {
            Self::parse_sql(text, schema)
        } else {
            Self::parse_datalog(text)
        }
    }

    pub fn to_datalog(&self) -> String {
        super::datalog::render(self)
    }

    pub fn to_sql(&self, schema: &Schema) -> Result<String> {
        super::sql::render(self, schema)
    }

    pub fn render(&self, style: QueryStyle, schema: &Schema) -> Result<String> {
        match style {
            QueryStyle::Datalog => Ok(self.to_datalog()),
            QueryStyle::Sql => self.to_sql(schema),
        }
    }

    /// Every `(atom, attribute index)` where each variable occurs, in order.
    pub fn occurrences(&self) -> BTreeMap<&str, Vec<(usize, usize)>> {
        let mut occ: BTreeMap<&str, Vec<(usize, usize)>> = BTreeMap::new();
        for (ai, atom) in self.atoms.iter().enumerate() {
            for (ti, term) in atom.terms.iter().enumerate() {
                if let Term::Var(v) = term {
                    occ.entry(v.as_str()).or_default().push((ai, ti));
                }
            }
        }
        occ
    }

    /// Variables in order of first occurrence.
    pub fn variables(&self) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for atom in &self.atoms {
            for term in &atom.terms {
                if let Term::Var(v) = term {
                    if seen.insert(v.as_str()) {
                        out.push(v.as_str());
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self, schema: &Schema) -> Result<()> {
        if self.atoms.is_empty() {
            return Err(Error::InvalidQuery("query has no atoms".into()));
        }
        let mut var_types: BTreeMap<&str, ValueType> = BTreeMap::new();
        for atom in &self.atoms {
            let rel = schema
                .relation(&atom.relation)
                .ok_or_else(|| Error::InvalidQuery(format!("unknown relation `{}`", atom.relation)))?;
            if atom.terms.len() != rel.arity() {
                return Err(Error::InvalidQuery(format!(
                    "atom over `{}` has {} terms, relation has arity {}",
                    rel.name,
                    atom.terms.len(),
                    rel.arity()
                )));
            }
            for (term, attr) in atom.terms.iter().zip(&rel.attributes) {
                match term {
                    Term::Const(c) if c.value_type() != attr.ty => {
                        return Err(Error::InvalidQuery(format!(
                            "constant `{c}` does not fit `{}.{}` ({})",
                            rel.name, attr.name, attr.ty
                        )));
                    }
                    Term::Var(v) => {
                        if let Some(prev) = var_types.insert(v, attr.ty) {
                            if prev != attr.ty {
                                return Err(Error::InvalidQuery(format!(
                                    "variable `{v}` joins {prev} and {} attributes",
                                    attr.ty
                                )));
                            }
                        }
                    }
                    Term::Const(_) => {}
                }
            }
        }
        for h in &self.head {
            if !var_types.contains_key(h.as_str()) {
                return Err(Error::InvalidQuery(format!("head variable `{h}` occurs in no atom")));
            }
        }
        for s in &self.selections {
            match var_types.get(s.var.as_str()) {
                None => {
                    return Err(Error::InvalidQuery(format!(
                        "selection on `{}`, which occurs in no atom",
                        s.var
                    )))
                }
                Some(ty) if *ty != s.value.value_type() => {
                    return Err(Error::InvalidQuery(format!(
                        "selection `{} = {}` compares a {ty} variable",
                        s.var, s.value
                    )))
                }
                Some(_) => {}
            }
        }
        Ok(())
    }
}

impl fmt::Display for ConjunctiveQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_datalog())
    }
}
