//! SELECT-FROM-WHERE text for conjunctive queries.
//!
//! Only the conjunctive fragment is accepted: qualified column references,
//! equality joins, equality (or wildcard-free `LIKE`) selections joined by
//! `AND`. Range predicates are rejected as unsupported.

use std::collections::BTreeMap;

use super::datalog::{lex_quoted, render_const};
use super::{Atom, ConjunctiveQuery, Schema, Selection, Term, Value};
use crate::error::{Error, Result};

fn aliases(q: &ConjunctiveQuery) -> Vec<String> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for a in &q.atoms {
        *counts.entry(a.relation.as_str()).or_default() += 1;
    }
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    q.atoms
        .iter()
        .map(|a| {
            if counts[a.relation.as_str()] == 1 {
                a.relation.clone()
            } else {
                let k = seen.entry(a.relation.as_str()).or_default();
                *k += 1;
                format!("{}_{}", a.relation, k)
            }
        })
        .collect()
}

pub(super) fn render(q: &ConjunctiveQuery, schema: &Schema) -> Result<String> {
    q.validate(schema)?;
    let aliases = aliases(q);
    let col = |atom: usize, attr: usize| -> String {
        let rel = schema.relation(&q.atoms[atom].relation).unwrap();
        format!("{}.{}", aliases[atom], rel.attr_name(attr))
    };
    let occ = q.occurrences();

    let select: Vec<String> = q
        .head
        .iter()
        .map(|h| {
            let (a, i) = occ[h.as_str()][0];
            col(a, i)
        })
        .collect();
    let from: Vec<String> = q
        .atoms
        .iter()
        .zip(&aliases)
        .map(|(atom, alias)| {
            if *alias == atom.relation {
                alias.clone()
            } else {
                format!("{} AS {alias}", atom.relation)
            }
        })
        .collect();

    let mut conds = Vec::new();
    for var in q.variables() {
        let slots = &occ[var];
        let (a0, i0) = slots[0];
        for &(a, i) in &slots[1..] {
            conds.push(format!("{} = {}", col(a0, i0), col(a, i)));
        }
    }
    for (ai, atom) in q.atoms.iter().enumerate() {
        for (ti, term) in atom.terms.iter().enumerate() {
            if let Term::Const(c) = term {
                conds.push(format!("{} = {}", col(ai, ti), render_const(c)));
            }
        }
    }
    for s in &q.selections {
        let (a, i) = occ[s.var.as_str()][0];
        conds.push(format!("{} = {}", col(a, i), render_const(&s.value)));
    }

    let mut out = format!("SELECT {} FROM {}", select.join(", "), from.join(", "));
    if !conds.is_empty() {
        out.push_str(" WHERE ");
        out.push_str(&conds.join(" AND "));
    }
    out.push(';');
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Word(String),
    Const(Value),
    Comma,
    Dot,
    Semi,
    Op(String),
}

fn lex(text: &str) -> Result<Vec<Tok>> {
    let err = |m: String| Error::parse("SQL query", m);
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            ',' => {
                toks.push(Tok::Comma);
                i += 1
            }
            '.' => {
                toks.push(Tok::Dot);
                i += 1
            }
            ';' => {
                toks.push(Tok::Semi);
                i += 1
            }
            '=' | '<' | '>' | '!' => {
                let mut op = c.to_string();
                if let Some(&n) = chars.get(i + 1) {
                    if matches!(n, '=' | '>') && c != '=' {
                        op.push(n);
                    }
                }
                i += op.chars().count();
                toks.push(Tok::Op(op));
            }
            '\'' | '"' | '`' | '‘' => {
                let (s, next) = lex_quoted(&chars, i).map_err(err)?;
                toks.push(Tok::Const(Value::Text(s)));
                i = next;
            }
            c if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) => {
                let start = i;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let n = s.parse().map_err(|_| err(format!("integer `{s}` out of range")))?;
                toks.push(Tok::Const(Value::Int(n)));
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                toks.push(Tok::Word(chars[start..i].iter().collect()));
            }
            other => return Err(err(format!("unexpected character `{other}`"))),
        }
    }
    Ok(toks)
}

const KEYWORDS: &[&str] = &["select", "from", "where", "and", "as", "like", "or", "not"];

fn is_kw(t: Option<&Tok>, kw: &str) -> bool {
    matches!(t, Some(Tok::Word(w)) if w.eq_ignore_ascii_case(kw))
}

#[derive(Debug)]
enum Operand {
    Column(Option<String>, String),
    Const(Value),
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn err(&self, msg: &str) -> Error {
        Error::parse("SQL query", format!("{msg} near {:?}", self.toks.get(self.pos)))
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn keyword(&mut self, kw: &str) -> bool {
        if is_kw(self.peek(), kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn name(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Word(w)) if !KEYWORDS.iter().any(|k| w.eq_ignore_ascii_case(k)) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.err("expected name")),
        }
    }

    fn operand(&mut self) -> Result<Operand> {
        if let Some(Tok::Const(c)) = self.peek() {
            let c = c.clone();
            self.pos += 1;
            return Ok(Operand::Const(c));
        }
        let first = self.name()?;
        if self.peek() == Some(&Tok::Dot) {
            self.pos += 1;
            let attr = self.name()?;
            Ok(Operand::Column(Some(first), attr))
        } else {
            Ok(Operand::Column(None, first))
        }
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let p = self.0[x];
        if p == x {
            x
        } else {
            let r = self.find(p);
            self.0[x] = r;
            r
        }
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

pub(super) fn parse(text: &str, schema: &Schema) -> Result<ConjunctiveQuery> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    if !p.keyword("select") {
        return Err(p.err("expected SELECT"));
    }
    let mut select = Vec::new();
    loop {
        select.push(p.operand()?);
        if p.peek() == Some(&Tok::Comma) {
            p.pos += 1;
        } else {
            break;
        }
    }
    if !p.keyword("from") {
        return Err(p.err("expected FROM"));
    }
    // (relation, alias)
    let mut tables: Vec<(String, String)> = Vec::new();
    loop {
        let rel = p.name()?;
        let explicit = p.keyword("as")
            || matches!(p.peek(), Some(Tok::Word(w)) if !KEYWORDS.iter().any(|k| w.eq_ignore_ascii_case(k)));
        let alias = if explicit {
            p.name()?
        } else {
            rel.clone()
        };
        tables.push((rel, alias));
        if p.peek() == Some(&Tok::Comma) {
            p.pos += 1;
            // tolerate a dangling comma before WHERE
            if is_kw(p.peek(), "where") || matches!(p.peek(), None | Some(Tok::Semi)) {
                break;
            }
        } else {
            break;
        }
    }
    let mut conds = Vec::new();
    if p.keyword("where") {
        loop {
            let lhs = p.operand()?;
            let op = match p.peek() {
                Some(Tok::Op(o)) => o.clone(),
                Some(Tok::Word(w)) if w.eq_ignore_ascii_case("like") => "LIKE".into(),
                _ => return Err(p.err("expected comparison")),
            };
            p.pos += 1;
            let rhs = p.operand()?;
            conds.push((lhs, op, rhs));
            if p.keyword("and") {
                continue;
            }
            if is_kw(p.peek(), "or") {
                return Err(Error::Unsupported("disjunction (OR)".into()));
            }
            break;
        }
    }
    if p.peek() == Some(&Tok::Semi) {
        p.pos += 1;
    }
    if p.pos < p.toks.len() {
        return Err(p.err("trailing input"));
    }

    let mut seen_alias = std::collections::BTreeSet::new();
    let mut offsets = Vec::new();
    let mut total = 0;
    for (rel, alias) in &tables {
        let decl = schema
            .relation(rel)
            .ok_or_else(|| Error::InvalidQuery(format!("unknown relation `{rel}`")))?;
        if !seen_alias.insert(alias.as_str()) {
            return Err(Error::InvalidQuery(format!("duplicate table alias `{alias}`")));
        }
        offsets.push(total);
        total += decl.arity();
    }
    let resolve = |qual: &Option<String>, attr: &str| -> Result<usize> {
        let hits: Vec<usize> = tables
            .iter()
            .enumerate()
            .filter(|(_, (_, alias))| qual.as_deref().is_none_or(|q| q == alias))
            .filter_map(|(ti, (rel, _))| schema.attr_index(rel, attr).map(|ai| offsets[ti] + ai))
            .collect();
        match hits.as_slice() {
            [one] => Ok(*one),
            [] => Err(Error::InvalidQuery(format!(
                "unknown column `{}{attr}`",
                qual.as_ref().map(|q| format!("{q}.")).unwrap_or_default()
            ))),
            _ => Err(Error::InvalidQuery(format!("ambiguous column `{attr}`"))),
        }
    };

    let mut uf = UnionFind((0..total).collect());
    let mut constants: Vec<(usize, Value)> = Vec::new();
    for (lhs, op, rhs) in &conds {
        match op.as_str() {
            "=" => {}
            "LIKE" => {
                if let Operand::Const(Value::Text(s)) = rhs {
                    if s.contains(['%', '_']) {
                        return Err(Error::Unsupported(format!("LIKE pattern `{s}`")));
                    }
                }
            }
            other => return Err(Error::Unsupported(format!("predicate with `{other}`"))),
        }
        match (lhs, rhs) {
            (Operand::Column(qa, a), Operand::Column(qb, b)) => {
                let (x, y) = (resolve(qa, a)?, resolve(qb, b)?);
                uf.union(x, y);
            }
            (Operand::Column(q, a), Operand::Const(c)) | (Operand::Const(c), Operand::Column(q, a)) => {
                constants.push((resolve(q, a)?, c.clone()));
            }
            (Operand::Const(_), Operand::Const(_)) => {
                return Err(Error::Unsupported("comparison between two constants".into()))
            }
        }
    }

    // Slot -> (table, attr) for naming.
    let slot_attr = |slot: usize| -> (usize, usize) {
        let ti = offsets.iter().rposition(|&o| o <= slot).unwrap();
        (ti, slot - offsets[ti])
    };
    let mut names: BTreeMap<usize, String> = BTreeMap::new();
    let mut used = std::collections::BTreeSet::new();
    for slot in 0..total {
        let root = uf.find(slot);
        if names.contains_key(&root) {
            continue;
        }
        let (ti, ai) = slot_attr(slot);
        let base = schema.relation(&tables[ti].0).unwrap().attr_name(ai).to_owned();
        let name = fresh_name(&base, &mut used);
        names.insert(root, name);
    }
    let atoms: Vec<Atom> = tables
        .iter()
        .enumerate()
        .map(|(ti, (rel, _))| {
            let arity = schema.relation(rel).unwrap().arity();
            let terms = (0..arity)
                .map(|ai| Term::Var(names[&uf.find(offsets[ti] + ai)].clone()))
                .collect();
            Atom::new(rel.clone(), terms)
        })
        .collect();
    let head = select
        .iter()
        .map(|op| match op {
            Operand::Column(q, a) => Ok(names[&uf.find(resolve(q, a)?)].clone()),
            Operand::Const(_) => Err(Error::Unsupported("constant in SELECT list".into())),
        })
        .collect::<Result<Vec<_>>>()?;
    let mut selections: Vec<Selection> = Vec::new();
    for (slot, c) in constants {
        let s = Selection {
            var: names[&uf.find(slot)].clone(),
            value: c,
        };
        if !selections.contains(&s) {
            selections.push(s);
        }
    }
    let q = ConjunctiveQuery::new(head, atoms, selections);
    q.validate(schema)?;
    Ok(q)
}

/// `base`, or `base` with the smallest numeric suffix not yet used.
pub(crate) fn fresh_name(base: &str, used: &mut std::collections::BTreeSet<String>) -> String {
    let mut name = base.to_owned();
    let mut k = 2;
    while used.contains(&name) {
        name = format!("{base}{k}");
        k += 1;
    }
    used.insert(name.clone());
    name
}
