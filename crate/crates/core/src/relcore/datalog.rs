//! Datalog-style text for conjunctive queries:
//!
//! ```text
//! q(cname, aname) :- author(aid, aname, oid), conf(cid, cname), oname = 'TAU'
//! ```

use super::{Atom, ConjunctiveQuery, Selection, Term, Value};
use crate::error::{Error, Result};

pub(super) fn render(q: &ConjunctiveQuery) -> String {
    let mut out = format!("{}({}) :- ", q.name, q.head.join(", "));
    let mut items: Vec<String> = q
        .atoms
        .iter()
        .map(|a| {
            let terms: Vec<String> = a.terms.iter().map(render_term).collect();
            format!("{}({})", a.relation, terms.join(", "))
        })
        .collect();
    items.extend(
        q.selections
            .iter()
            .map(|s| format!("{} = {}", s.var, render_const(&s.value))),
    );
    out.push_str(&items.join(", "));
    out
}

fn render_term(t: &Term) -> String {
    match t {
        Term::Var(v) => v.clone(),
        Term::Const(c) => render_const(c),
    }
}

pub(crate) fn render_const(v: &Value) -> String {
    match v {
        Value::Int(i) => i.to_string(),
        Value::Text(s) => format!("'{}'", s.replace('\'', "''")),
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Const(Value),
    LParen,
    RParen,
    Comma,
    Turnstile,
    Eq,
    Dot,
}

fn lex(text: &str) -> Result<Vec<Tok>> {
    let err = |m: String| Error::parse("datalog query", m);
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '(' => {
                toks.push(Tok::LParen);
                i += 1
            }
            ')' => {
                toks.push(Tok::RParen);
                i += 1
            }
            ',' => {
                toks.push(Tok::Comma);
                i += 1
            }
            '=' => {
                toks.push(Tok::Eq);
                i += 1
            }
            '.' => {
                toks.push(Tok::Dot);
                i += 1
            }
            ':' if chars.get(i + 1) == Some(&'-') => {
                toks.push(Tok::Turnstile);
                i += 2
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
                toks.push(Tok::Ident(chars[start..i].iter().collect()));
            }
            other => return Err(err(format!("unexpected character `{other}`"))),
        }
    }
    Ok(toks)
}

/// Reads a quoted string starting at `start`. A doubled closing quote
/// escapes itself. Backtick and left-single-quote open strings closed by `'`
/// (or `’`).
pub(crate) fn lex_quoted(chars: &[char], start: usize) -> std::result::Result<(String, usize), String> {
    let open = chars[start];
    let closers: &[char] = match open {
        '"' => &['"'],
        '`' => &['\'', '`'],
        '‘' => &['’', '\''],
        _ => &['\''],
    };
    let mut s = String::new();
    let mut i = start + 1;
    while i < chars.len() {
        let c = chars[i];
        if closers.contains(&c) {
            if chars.get(i + 1) == Some(&c) {
                s.push(c);
                i += 2;
                continue;
            }
            return Ok((s, i + 1));
        }
        s.push(c);
        i += 1;
    }
    Err("unterminated string".to_owned())
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn err(&self, msg: &str) -> Error {
        Error::parse(
            "datalog query",
            format!("{msg} at token {} ({:?})", self.pos, self.toks.get(self.pos)),
        )
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected {what}")))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            _ => {
                self.pos -= 1;
                Err(self.err("expected identifier"))
            }
        }
    }

    fn term_list(&mut self) -> Result<Vec<Term>> {
        self.expect(Tok::LParen, "`(`")?;
        let mut terms = Vec::new();
        if self.peek() == Some(&Tok::RParen) {
            self.pos += 1;
            return Ok(terms);
        }
        loop {
            match self.next() {
                Some(Tok::Ident(v)) => terms.push(Term::Var(v)),
                Some(Tok::Const(c)) => terms.push(Term::Const(c)),
                _ => {
                    self.pos -= 1;
                    return Err(self.err("expected term"));
                }
            }
            match self.next() {
                Some(Tok::Comma) => continue,
                Some(Tok::RParen) => return Ok(terms),
                _ => {
                    self.pos -= 1;
                    return Err(self.err("expected `,` or `)`"));
                }
            }
        }
    }
}

pub(super) fn parse(text: &str) -> Result<ConjunctiveQuery> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let name = p.ident()?;
    let mut head = Vec::new();
    for t in p.term_list()? {
        match t {
            Term::Var(v) => head.push(v),
            Term::Const(c) => return Err(Error::parse("datalog query", format!("constant `{c}` in query head"))),
        }
    }
    p.expect(Tok::Turnstile, "`:-`")?;
    let mut atoms = Vec::new();
    let mut selections = Vec::new();
    loop {
        match (p.next(), p.peek().cloned()) {
            (Some(Tok::Ident(rel)), Some(Tok::LParen)) => {
                let terms = p.term_list()?;
                atoms.push(Atom::new(rel, terms));
            }
            (Some(Tok::Ident(var)), Some(Tok::Eq)) => {
                p.pos += 1;
                match p.next() {
                    Some(Tok::Const(c)) => selections.push(Selection { var, value: c }),
                    _ => {
                        p.pos -= 1;
                        return Err(p.err("expected constant after `=`"));
                    }
                }
            }
            (Some(Tok::Const(c)), Some(Tok::Eq)) => {
                p.pos += 1;
                let var = p.ident()?;
                selections.push(Selection { var, value: c });
            }
            _ => {
                p.pos -= 1;
                return Err(p.err("expected atom or selection"));
            }
        }
        match p.next() {
            Some(Tok::Comma) => continue,
            Some(Tok::Dot) | None => break,
            _ => {
                p.pos -= 1;
                return Err(p.err("expected `,`"));
            }
        }
    }
    if p.pos < p.toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(ConjunctiveQuery {
        name,
        head,
        atoms,
        selections,
    })
}
