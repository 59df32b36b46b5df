//! Query inference from output examples explained by lineage.
//!
//! Given a relational instance and a few output tuples, each explained by
//! the input tuples that produced it, the crate infers a conjunctive query
//! with a minimal join graph that produces every output from its
//! explanation. Explanations may be partial (missing pure join tuples) or
//! written as free-form values that are mapped back to tuples.

pub mod cli;
pub mod demo;
pub mod error;
pub mod infer;
pub mod io;
pub mod joingraph;
pub mod provgraph;
pub mod relcore;
pub mod valuemap;

pub use error::{Error, Result};
