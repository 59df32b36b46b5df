//! Command-line front end: `infer`, `map-values`, `complete` and `check`.
//!
//! [`run`] holds the whole program so it can be driven from tests; the
//! binary only forwards process arguments and exits with its status.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::infer::{self, InferenceConfig, Mode, StageTimings};
use crate::io::{self, Explanation, RawRow};
use crate::provgraph::{ExampleRow, ProvExample};
use crate::relcore::{ConjunctiveQuery, Instance, QueryStyle};
use crate::valuemap::{ValueMapper, ValueMatch};

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    /// `check` found the query inconsistent.
    pub const INCONSISTENT: i32 = 1;
    /// Bad arguments, unreadable files or an example without rows.
    pub const USAGE: i32 = 2;
    /// A schema, instance, example or query failed to parse or validate.
    pub const INVALID_INPUT: i32 = 3;
    pub const UNMATCHED_VALUE: i32 = 4;
    pub const INCOMPLETABLE: i32 = 5;
    pub const UNSUPPORTED_FRAGMENT: i32 = 6;
    pub const NO_PROJECTION: i32 = 7;
    pub const NO_CONSISTENT_QUERY: i32 = 8;
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => exit::USAGE,
        Error::UnmatchedValue { .. } => exit::UNMATCHED_VALUE,
        Error::Incompletable(_) => exit::INCOMPLETABLE,
        Error::UnsupportedFragment(_) => exit::UNSUPPORTED_FRAGMENT,
        Error::NoProjection { .. } => exit::NO_PROJECTION,
        Error::NoConsistentQuery { .. } => exit::NO_CONSISTENT_QUERY,
        _ => exit::INVALID_INPUT,
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "prov-qbe",
    version,
    about = "Infer conjunctive queries from explained output examples"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Infer a consistent query with a minimal join graph.
    Infer(RunConfig),
    /// Map value explanations to tuples and print the mapping report.
    MapValues(RunConfig),
    /// Add the pure-join tuples missing from each explanation.
    Complete(RunConfig),
    /// Decide whether a query is consistent with the example.
    Check {
        #[command(flatten)]
        config: RunConfig,
        /// Query file, datalog or SQL.
        #[arg(long)]
        query: PathBuf,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Style {
    Datalog,
    Sql,
}

impl From<Style> for QueryStyle {
    fn from(s: Style) -> Self {
        match s {
            Style::Datalog => QueryStyle::Datalog,
            Style::Sql => QueryStyle::Sql,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    #[arg(long)]
    pub schema: PathBuf,
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub example: PathBuf,
    /// Explanations may omit pure-join tuples; complete them first.
    #[arg(long)]
    pub joinless: bool,
    #[arg(long, value_enum, default_value_t = Style::Datalog)]
    pub style: Style,
    /// Print per-stage durations after the result.
    #[arg(long)]
    pub timings: bool,
    /// Minimum similarity for mapping a value to a tuple.
    #[arg(long, default_value_t = 0.5, value_parser = parse_threshold)]
    pub sim_threshold: f64,
    /// Largest join graph to try.
    #[arg(long)]
    pub max_nodes: Option<usize>,
}

fn parse_threshold(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(format!("{x} is not in [0, 1]"))
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => exit::OK,
                _ => exit::USAGE,
            };
        }
    };
    match execute(&cli.command, out, err) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            exit::USAGE
        }
        Err(Failure::Error(e)) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

enum Failure {
    Usage(String),
    Error(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Error(Error::Io(e))
    }
}

struct Loaded {
    d: Instance,
    rows: Vec<RawRow>,
}

fn load(cfg: &RunConfig) -> Result<Loaded, Failure> {
    let schema = io::load_schema(&cfg.schema)?;
    let d = io::load_instance(&cfg.instance, schema)?;
    let text = std::fs::read_to_string(&cfg.example)?;
    if text.trim().is_empty() {
        return Err(Failure::Usage(format!("{} is empty", cfg.example.display())));
    }
    let rows = io::parse_example(&text)?;
    if rows.is_empty() {
        return Err(Failure::Usage(format!("{} has no rows", cfg.example.display())));
    }
    Ok(Loaded { d, rows })
}

/// Resolves value rows through the mapper; returns the example and the
/// matches per row (empty for tuple-id rows).
fn resolve(rows: &[RawRow], d: &Instance, mapper: &ValueMapper) -> crate::Result<(ProvExample, Vec<Vec<ValueMatch>>)> {
    let mut resolved = Vec::with_capacity(rows.len());
    let mut matches = Vec::with_capacity(rows.len());
    for r in rows {
        match &r.explanation {
            Explanation::TupleIds(ids) => {
                resolved.push(ExampleRow::new(ids.iter().cloned(), r.output.clone()));
                matches.push(Vec::new());
            }
            Explanation::Values(values) => {
                let m = mapper.map_values(values, d)?;
                resolved.push(ExampleRow::new(
                    m.iter().map(|x| x.annotation.clone()),
                    r.output.clone(),
                ));
                matches.push(m);
            }
        }
    }
    Ok((ProvExample::new(resolved, d)?, matches))
}

fn execute(cmd: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    match cmd {
        Command::Infer(cfg) => cmd_infer(cfg, out, err),
        Command::MapValues(cfg) => cmd_map_values(cfg, out, err),
        Command::Complete(cfg) => cmd_complete(cfg, out),
        Command::Check { config, query } => cmd_check(config, query, out),
    }
}

fn cmd_infer(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let Loaded { d, rows } = load(cfg)?;
    let start = Instant::now();
    let (ex, matches) = resolve(&rows, &d, &ValueMapper::with_threshold(cfg.sim_threshold))?;
    let value_mapping = start.elapsed();
    warn_ties(matches.iter().flatten(), err)?;
    let result = infer::infer_query_with(
        &ex,
        &d,
        &InferenceConfig {
            mode: if cfg.joinless { Mode::Joinless } else { Mode::Full },
            max_nodes: cfg.max_nodes,
            parallel: true,
        },
    )?;
    writeln!(out, "{}", result.query.render(cfg.style.into(), d.schema())?)?;
    if cfg.timings {
        let timings = StageTimings {
            value_mapping,
            ..result.timings
        };
        write_timings(&timings, out)?;
    }
    Ok(exit::OK)
}

/// Tab-separated block after the result, opened by a `# timings` line.
pub fn write_timings(t: &StageTimings, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "# timings")?;
    writeln!(out, "stage\tseconds")?;
    for (name, dur) in t.stages() {
        writeln!(out, "{name}\t{:.6}", dur.as_secs_f64())?;
    }
    Ok(())
}

fn warn_ties<'a>(matches: impl Iterator<Item = &'a ValueMatch>, err: &mut dyn Write) -> std::io::Result<()> {
    for m in matches.filter(|m| m.ties > 0) {
        writeln!(
            err,
            "warning: `{}` matches {} other tuple(s) as well as {} (score {:.4})",
            m.value, m.ties, m.annotation, m.score
        )?;
    }
    Ok(())
}

fn cmd_map_values(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let Loaded { d, rows } = load(cfg)?;
    let mapper = ValueMapper::with_threshold(cfg.sim_threshold);
    let mut status = exit::OK;
    for r in &rows {
        let Explanation::Values(values) = &r.explanation else {
            continue;
        };
        for v in values {
            match mapper.best_match(v, &d) {
                Some(m) if m.score >= mapper.threshold => {
                    let attr = d.schema().relation(&m.relation).unwrap().attr_name(m.attr_index);
                    writeln!(
                        out,
                        "{}\t{}\t{:.4}\t{}.{}\t{}",
                        m.value,
                        m.annotation,
                        m.score,
                        m.relation,
                        attr,
                        if m.exact { "exact" } else { "fuzzy" }
                    )?;
                    warn_ties(std::iter::once(&m), err)?;
                }
                other => {
                    let score = other.map_or(0.0, |m| m.score);
                    writeln!(out, "{v}\t-\t{score:.4}\t-\tunmatched")?;
                    status = exit::UNMATCHED_VALUE;
                }
            }
        }
    }
    Ok(status)
}

fn cmd_complete(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32, Failure> {
    let Loaded { d, rows } = load(cfg)?;
    let (ex, _) = resolve(&rows, &d, &ValueMapper::with_threshold(cfg.sim_threshold))?;
    let (completed, _) = infer::complete_example(&ex, &d)?;
    write!(out, "{}", io::example_to_json(&completed))?;
    Ok(exit::OK)
}

fn cmd_check(cfg: &RunConfig, query: &PathBuf, out: &mut dyn Write) -> Result<i32, Failure> {
    let Loaded { d, rows } = load(cfg)?;
    let q = ConjunctiveQuery::parse_any(&std::fs::read_to_string(query)?, d.schema())?;
    q.validate(d.schema())?;
    let (mut ex, _) = resolve(&rows, &d, &ValueMapper::with_threshold(cfg.sim_threshold))?;
    if cfg.joinless {
        ex = infer::complete_example(&ex, &d)?.0;
    }
    if !infer::check_consistent(&q, &ex, &d)? {
        writeln!(out, "inconsistent")?;
        return Ok(exit::INCONSISTENT);
    }
    writeln!(out, "consistent")?;
    match infer::smaller_consistent_graph(&ex, &d, q.atoms.len())? {
        None => writeln!(out, "minimal: yes")?,
        Some(g) => writeln!(
            out,
            "minimal: no (a consistent query with {} atoms exists: {})",
            g.node_count(),
            g.to_query(d.schema())?.to_datalog()
        )?,
    }
    Ok(exit::OK)
}
