//! Acceptance suite. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion; exits non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use prov_qbe::demo;
use prov_qbe::infer::{self, InferenceConfig, Mode};
use prov_qbe::joingraph::{find_cover, JoinGraph, JoinNode};
use prov_qbe::provgraph::{ExampleRow, ProvExample, ProvenanceGraph};
use prov_qbe::relcore::{evaluate, lineage, Annotation, ConjunctiveQuery, Instance, OutputTuple, Value};
use prov_qbe::valuemap::map_values;
use prov_qbe::{cli, io, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("prov-qbe").chain(args.iter().copied());
    let code = cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn running_args(cmd: &str, example: &str) -> Vec<String> {
    vec![
        cmd.into(),
        "--schema".into(),
        fixture("running/schema.json").display().to_string(),
        "--instance".into(),
        fixture("running/instance.json").display().to_string(),
        "--example".into(),
        fixture(example).display().to_string(),
    ]
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// The join graph drawn for the running example, built from its node and
/// edge list rather than from a query: seven atoms joined along the chain
/// org - author - writes - pub - conf - domain_conf - domain.
fn drawn_join_graph() -> JoinGraph {
    let nodes = vec![
        JoinNode::new("org", 2, vec![]),
        JoinNode::new("author", 3, vec![(1, 1)]),
        JoinNode::new("writes", 2, vec![]),
        JoinNode::new("pub", 4, vec![]),
        JoinNode::new("conf", 2, vec![(1, 0)]),
        JoinNode::new("domain_conf", 2, vec![]),
        JoinNode::new("domain", 2, vec![]),
    ];
    let edges = [
        (0, 0, 1, 2), // org.oid = author.oid
        (1, 0, 2, 0), // author.aid = writes.aid
        (2, 1, 3, 0), // writes.wid = pub.wid
        (3, 1, 4, 0), // pub.cid = conf.cid
        (4, 0, 5, 0), // conf.cid = domain_conf.cid
        (5, 1, 6, 0), // domain_conf.did = domain.did
    ];
    JoinGraph::new(nodes, 2, edges).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let args = running_args("infer", "running/full.json");
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let (code, out, err) = run_cli(&args);
    let elapsed = start.elapsed();
    ensure(code == 0, || format!("infer exited {code}: {err}"))?;
    let q = ConjunctiveQuery::parse_datalog(out.trim()).map_err(|e| e.to_string())?;
    let g = JoinGraph::from_query(&q);
    let drawn = drawn_join_graph();
    ensure(g.node_count() == 7, || format!("{} atoms", g.node_count()))?;
    ensure(g.is_isomorphic(&drawn), || {
        format!("join graph differs: {}", out.trim())
    })?;
    let sel: BTreeSet<String> = q
        .selections
        .iter()
        .map(|s| format!("{}={}", attr_of(&q, &s.var), s.value))
        .collect();
    for want in ["oname=TAU", "dname=DB"] {
        ensure(sel.contains(want), || format!("missing selection {want}; got {sel:?}"))?;
    }
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "7 nodes, isomorphic, selections {sel:?}, {:.1} ms",
        ms(elapsed)
    ))
}

/// Attribute name of the single occurrence of `var`.
fn attr_of(q: &ConjunctiveQuery, var: &str) -> String {
    let schema = demo::running_schema();
    let (a, i) = q.occurrences()[var][0];
    schema.relation(&q.atoms[a].relation).unwrap().attr_name(i).to_owned()
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let args = running_args("complete", "running/partial.json");
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let (code, out, err) = run_cli(&args);
    let elapsed = start.elapsed();
    ensure(code == 0, || format!("complete exited {code}: {err}"))?;
    let d = demo::running_instance();
    let completed = io::example_from_tuple_ids(&io::parse_example(&out).map_err(|e| e.to_string())?, &d)
        .map_err(|e| e.to_string())?;
    let partial = demo::running_partial(&d);
    let added: Vec<BTreeSet<&str>> = completed
        .rows()
        .iter()
        .zip(partial.rows())
        .map(|(c, p)| {
            c.explanation
                .difference(&p.explanation)
                .map(Annotation::as_str)
                .collect()
        })
        .collect();
    let want = vec![BTreeSet::from(["w1", "dc2"]), BTreeSet::from(["w3", "dc1"])];
    ensure(added == want, || format!("added {added:?}"))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("added {added:?}, {:.1} ms", ms(elapsed)))
}

fn criterion_3() -> Outcome {
    let d = demo::running_instance();
    let values = demo::first_row_values();
    let m = map_values(&values, &d).map_err(|e| e.to_string())?;
    let got: Vec<&str> = m.iter().map(|x| x.annotation.as_str()).collect();
    ensure(got == ["o2", "a2", "p1", "p2", "c2", "d1"], || {
        format!("mapped to {got:?}")
    })?;
    ensure(m.iter().all(|x| x.score == 1.0), || {
        format!("scores {:?}", m.iter().map(|x| x.score).collect::<Vec<_>>())
    })?;
    Ok(format!("{values:?} -> {got:?}, all scores 1"))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0004);
    let (mut cases, mut consistent) = (0, 0);
    while cases < 300 {
        let d = common::random_instance(&mut rng, 5, 15);
        let q = common::random_query(&mut rng, &d, 4, false);
        let Some((expl, o)) = common::random_explanation(&mut rng, &q, &d) else {
            continue;
        };
        let p = ProvenanceGraph::build(&expl, &d).map_err(|e| e.to_string())?;
        let via_cover = find_cover(&JoinGraph::from_query(&q), &p, &o).is_some();
        let oracle = common::brute_consistent(&q, &d, &expl, &o);
        ensure(via_cover == oracle, || {
            format!("case {cases}: cover {via_cover}, oracle {oracle} for {q} with {expl:?} -> {o:?}")
        })?;
        cases += 1;
        consistent += oracle as usize;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{cases}/{cases} agree ({consistent} consistent, {} not), {:.2} s",
        cases - consistent,
        elapsed.as_secs_f64()
    ))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0005);
    let (mut cases, mut outputs) = (0, 0);
    while cases < 150 {
        let d = common::random_instance(&mut rng, 4, 12);
        let q = common::random_query(&mut rng, &d, 3, true);
        let results = evaluate(&q, &d).map_err(|e| e.to_string())?;
        if results.is_empty() && rng.gen_bool(0.8) {
            continue;
        }
        let o = match results.keys().nth(rng.gen_range(0..=results.len())) {
            Some(o) => o.clone(),
            // One past the end: probe a tuple that is not an output.
            None => OutputTuple::new(vec![Value::Int(99); q.head.len()]),
        };
        let oracle = common::brute_lineage(&q, &d, &o);
        let got = match lineage(&q, &d, &o) {
            Ok(l) => l,
            Err(Error::NotAnOutput(_)) => BTreeSet::new(),
            Err(e) => return Err(e.to_string()),
        };
        ensure(got == oracle, || {
            format!("case {cases}: {q} on {o:?}: {got:?} vs {oracle:?}")
        })?;
        cases += 1;
        outputs += !oracle.is_empty() as usize;
    }
    Ok(format!(
        "{cases}/{cases} agree ({outputs} outputs, {} non-outputs)",
        cases - outputs
    ))
}

/// A two-row example from the first two outputs of `q`, explained by
/// their full lineage.
fn two_row_example(q: &ConjunctiveQuery, d: &Instance) -> Result<ProvExample, String> {
    let results = evaluate(q, d).map_err(|e| e.to_string())?;
    let rows: Vec<ExampleRow> = results
        .into_iter()
        .take(2)
        .map(|(o, assignments)| {
            let lin: BTreeSet<Annotation> = assignments.iter().flat_map(|a| a.tuples().iter().cloned()).collect();
            ExampleRow {
                explanation: lin,
                output: o,
            }
        })
        .collect();
    ensure(rows.len() == 2, || format!("{q} has fewer than two outputs"))?;
    ProvExample::new(rows, d).map_err(|e| e.to_string())
}

fn minimal_and_consistent(label: &str, ex: &ProvExample, d: &Instance) -> Result<usize, String> {
    let r = infer::infer_query(ex, d, Mode::Full).map_err(|e| format!("{label}: {e}"))?;
    let n = r.graph.node_count();
    let smaller = infer::smaller_consistent_graph(ex, d, n).map_err(|e| e.to_string())?;
    ensure(smaller.is_none(), || {
        format!("{label}: a {}-node graph also covers", smaller.unwrap().node_count())
    })?;
    let ok = infer::check_consistent(&r.query, ex, d).map_err(|e| e.to_string())?;
    ensure(ok, || format!("{label}: inferred {} is not consistent", r.query))?;
    Ok(n)
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let d = demo::running_instance();
    let mut sizes = vec![minimal_and_consistent("running", &demo::running_full(&d), &d)?];
    let mas = demo::mas_instance();
    for (n, q) in demo::mas_queries(mas.schema()) {
        let ex = two_row_example(&q, &mas)?;
        sizes.push(minimal_and_consistent(&format!("query {n}"), &ex, &mas)?);
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(120), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "running + 9 queries minimal and consistent, sizes {sizes:?}, {:.2} s",
        elapsed.as_secs_f64()
    ))
}

fn median(mut xs: Vec<Duration>) -> Duration {
    xs.sort();
    xs[xs.len() / 2]
}

fn criterion_7() -> Outcome {
    const RUNS: usize = 51;
    let mas = demo::mas_instance();
    let cfg = InferenceConfig {
        mode: Mode::Full,
        ..InferenceConfig::default()
    };
    let mut medians = Vec::new();
    for (n, q) in demo::mas_queries(mas.schema()) {
        let joins = q.atoms.len() - 1;
        if n != 6 && joins > 4 {
            continue;
        }
        let ex = two_row_example(&q, &mas)?;
        let mut times = Vec::with_capacity(RUNS);
        for _ in 0..RUNS {
            let r = infer::infer_query_with(&ex, &mas, &cfg).map_err(|e| e.to_string())?;
            times.push(r.timings.inference);
        }
        medians.push((n, joins, median(times)));
    }
    let &(_, q6_joins, q6) = medians.iter().find(|m| m.0 == 6).unwrap();
    ensure(q6_joins >= 7, || format!("query 6 has {q6_joins} joins"))?;
    let small: Vec<_> = medians.iter().filter(|m| m.0 != 6).collect();
    let slowest_small = small.iter().map(|m| m.2).max().unwrap();
    ensure(q6 > slowest_small, || {
        format!("query 6 inference {q6:?} does not exceed the <=4-join queries {small:?}")
    })?;

    let args = running_args("infer", "running/values.json");
    let mut args: Vec<&str> = args.iter().map(String::as_str).collect();
    args.extend(["--joinless", "--timings"]);
    let (code, out, err) = run_cli(&args);
    ensure(code == 0, || format!("infer --timings exited {code}: {err}"))?;
    let block: Vec<&str> = out.lines().skip_while(|l| *l != "# timings").collect();
    let stages: Vec<&str> = block.iter().skip(2).filter_map(|l| l.split('\t').next()).collect();
    ensure(block.get(1) == Some(&"stage\tseconds"), || {
        format!("timings block {block:?}")
    })?;
    ensure(stages == ["value-mapping", "completion", "inference"], || {
        format!("stages {stages:?}")
    })?;
    Ok(format!(
        "query 6 ({q6_joins} joins) inference median {:.3} ms vs at most {:.3} ms for {} queries with <=4 joins; --timings lists {stages:?}",
        ms(q6),
        ms(slowest_small),
        small.len()
    ))
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("running example end-to-end", criterion_1),
        ("joinless completion", criterion_2),
        ("value mapping", criterion_3),
        ("cover existence vs brute-force consistency", criterion_4),
        ("lineage vs brute force", criterion_5),
        ("minimality by exhaustion", criterion_6),
        ("stage timings", criterion_7),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
