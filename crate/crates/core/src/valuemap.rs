//! Mapping free-form explanation values to the tuples they most likely
//! denote.
//!
//! A tuple scores the best similarity any of its cells has with the value.
//! Text cells use a pluggable similarity (normalized Levenshtein over
//! lowercased text by default), integer cells `1 / (1 + |x - v|)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::relcore::{AnnotatedTuple, Annotation, Instance, Value};

pub type TextSimilarity = fn(&str, &str) -> f64;

/// Case-insensitive normalized edit similarity: `1 - lev / max(len)`.
pub fn normalized_edit_similarity(cell: &str, value: &str) -> f64 {
    strsim::normalized_levenshtein(&cell.to_lowercase(), &value.to_lowercase())
}

#[derive(Clone, Copy, Debug)]
pub struct ValueMapper {
    /// Best scores below this are reported unmatched.
    pub threshold: f64,
    pub text_similarity: TextSimilarity,
}

impl Default for ValueMapper {
    fn default() -> Self {
        ValueMapper {
            threshold: 0.5,
            text_similarity: normalized_edit_similarity,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValueMatch {
    pub value: String,
    pub annotation: Annotation,
    pub score: f64,
    pub relation: String,
    pub attr_index: usize,
    pub exact: bool,
    /// Other tuples reaching the same best score.
    pub ties: usize,
}

impl ValueMapper {
    pub fn with_threshold(threshold: f64) -> Self {
        ValueMapper {
            threshold,
            ..ValueMapper::default()
        }
    }

    /// Similarity of one cell to `v`, in `[0, 1]`; 1 exactly when the cell
    /// matches (text compared case-insensitively).
    pub fn score_cell(&self, cell: &Value, v: &str) -> f64 {
        match cell {
            Value::Text(s) if s.to_lowercase() == v.to_lowercase() => 1.0,
            Value::Text(s) => (self.text_similarity)(s, v).clamp(0.0, 1.0).min(next_below_one()),
            Value::Int(x) => match v.trim().parse::<i64>() {
                Ok(n) => 1.0 / (1.0 + (*x as f64 - n as f64).abs()),
                Err(_) => 0.0,
            },
        }
    }

    /// Best cell score of `t` and the lowest attribute index reaching it.
    pub fn score_tuple(&self, t: &AnnotatedTuple, v: &str) -> (f64, usize) {
        let mut best = (0.0, 0);
        for (i, cell) in t.values.iter().enumerate() {
            let s = self.score_cell(cell, v);
            if s > best.0 {
                best = (s, i);
            }
        }
        best
    }

    /// The best tuple for `v`, scanning relations in schema order and tuples
    /// by annotation. The first exact match wins. `None` only for an
    /// empty instance. The threshold is not applied.
    pub fn best_match(&self, v: &str, d: &Instance) -> Option<ValueMatch> {
        let mut best: Option<(f64, usize, &AnnotatedTuple)> = None;
        let mut ties = 0;
        let mut tuples = d.tuples_in_schema_order();
        while let Some(t) = tuples.by_ref().next() {
            let (score, attr) = self.score_tuple(t, v);
            if score >= 1.0 {
                // The winner is fixed; later exact matches are only counted.
                let ties = tuples.filter(|u| self.score_tuple(u, v).0 >= 1.0).count();
                return Some(self.make(v, t, score, attr, ties));
            }
            match best {
                Some((b, _, _)) if score < b => {}
                Some((b, _, _)) if score == b => ties += 1,
                _ => {
                    best = Some((score, attr, t));
                    ties = 0;
                }
            }
        }
        best.map(|(score, attr, t)| self.make(v, t, score, attr, ties))
    }

    fn make(&self, v: &str, t: &AnnotatedTuple, score: f64, attr: usize, ties: usize) -> ValueMatch {
        ValueMatch {
            value: v.to_owned(),
            annotation: t.annotation.clone(),
            score,
            relation: t.relation.clone(),
            attr_index: attr,
            exact: score >= 1.0,
            ties,
        }
    }

    /// Per value (in input order) its best match, or the unmatched error for
    /// the first value whose best score is below the threshold.
    pub fn map_values(&self, values: &[String], d: &Instance) -> Result<Vec<ValueMatch>> {
        let found: Vec<Option<ValueMatch>> = values.par_iter().map(|v| self.best_match(v, d)).collect();
        values
            .iter()
            .zip(found)
            .map(|(v, m)| match m {
                Some(m) if m.score >= self.threshold => Ok(m),
                other => Err(Error::UnmatchedValue {
                    value: v.clone(),
                    best_score: other.map_or(0.0, |m| m.score),
                }),
            })
            .collect()
    }
}

/// Keeps fuzzy scores strictly below 1 so that score 1 always means exact.
fn next_below_one() -> f64 {
    1.0 - f64::EPSILON
}

pub fn score_tuple(t: &AnnotatedTuple, v: &str) -> (f64, usize) {
    ValueMapper::default().score_tuple(t, v)
}

pub fn map_values(values: &[String], d: &Instance) -> Result<Vec<ValueMatch>> {
    ValueMapper::default().map_values(values, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relcore::{Attribute, RelationDecl, Schema, ValueType};

    fn conf() -> Instance {
        let schema = Schema::new(
            vec![RelationDecl::new(
                "conf",
                vec![
                    Attribute::new("cid", ValueType::Integer),
                    Attribute::new("cname", ValueType::Text),
                ],
                vec![],
            )],
            vec![],
        )
        .unwrap();
        Instance::new(
            schema,
            vec![
                AnnotatedTuple::new("c1", "conf", vec![Value::Int(10), "CIKM".into()]),
                AnnotatedTuple::new("c2", "conf", vec![Value::Int(11), "SIGMOD".into()]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn one_edit_from_sigmod() {
        let d = conf();
        let (s, i) = score_tuple(d.tuple("c2").unwrap(), "SIGMD");
        assert!((s - (1.0 - 1.0 / 6.0)).abs() < 1e-12);
        assert_eq!(i, 1);
    }

    #[test]
    fn exact_is_case_insensitive_and_integers_are_l1() {
        let d = conf();
        assert_eq!(score_tuple(d.tuple("c2").unwrap(), "sigmod"), (1.0, 1));
        assert_eq!(score_tuple(d.tuple("c1").unwrap(), "10"), (1.0, 0));
        let (s, i) = score_tuple(d.tuple("c1").unwrap(), "12");
        assert!((s - 1.0 / 3.0).abs() < 1e-12 && i == 0);
        assert_eq!(ValueMapper::default().score_cell(&Value::Int(3), "three"), 0.0);
    }

    #[test]
    fn two_edits_from_alice() {
        let schema = Schema::new(
            vec![RelationDecl::new(
                "author",
                vec![Attribute::new("aname", ValueType::Text)],
                vec![],
            )],
            vec![],
        )
        .unwrap();
        let t = |a: &str, n: &str| AnnotatedTuple::new(a, "author", vec![n.into()]);
        let d = Instance::new(schema, vec![t("a1", "Carol"), t("a2", "Alice"), t("a3", "Bob")]).unwrap();
        let m = &map_values(&["Alicia".into()], &d).unwrap()[0];
        assert_eq!(m.annotation.as_str(), "a2");
        assert!((m.score - (1.0 - 2.0 / 6.0)).abs() < 1e-12 && !m.exact);
    }

    #[test]
    fn below_threshold_is_unmatched() {
        let d = conf();
        let err = map_values(&["VLDB".into()], &d).unwrap_err();
        assert!(matches!(err, Error::UnmatchedValue { ref value, .. } if value == "VLDB"));
        assert!(map_values(&[], &d).unwrap().is_empty());
    }
}
