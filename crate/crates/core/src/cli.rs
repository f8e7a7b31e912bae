//! Command-line front end. Every verb produces one JSON report; failures
//! map to exit codes by class.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::borel::{evaluate, BorelCode, Ordinal};
use crate::cantor::{Bits, OpenSet, Point};
use crate::decorate::{check_preservation, decorate, Budget, DecorationGenerator, EmptyGenerator, SplitGenerator};
use crate::dsl;
use crate::gdelta::{combine, LevelTable, RapidGDelta, Schedule};
use crate::measure::{build_decomposition, measure_of_code, verify_decomposition, MeasureError};
use crate::sampler::{mc_integral, Integrand};

pub const SCHEMA: &str = "cantor-measure/1";

/// Largest prefix depth enumerated by `decorate`.
const MAX_POINT_DEPTH: usize = 12;

#[derive(Debug, Parser)]
#[command(name = "cantor-measure", version, about = "Exact measure computations on Cantor space")]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
    /// Also write the report to this file.
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// Parse an expression and print its canonical form.
    Parse(CodeArgs),
    /// Membership of a point.
    Eval {
        #[command(flatten)]
        code: CodeArgs,
        /// `u=<bits>:v=<bits>` or `seed=<int>`.
        #[arg(long)]
        point: String,
    },
    /// Exact measure, optionally with a Monte Carlo estimate.
    Measure {
        #[command(flatten)]
        code: CodeArgs,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Build and verify a measure decomposition.
    Decompose(CodeArgs),
    /// Combine rapidly null tests read from a JSON file.
    TestsCombine {
        /// `{"tests": [{"label": .., "levels": [{"stages": [[bits..], ..]}, ..]}], "schedule": ..}`
        file: PathBuf,
        /// Stages to materialize per level.
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
    /// Decorate a ranked code.
    Decorate {
        #[command(flatten)]
        code: CodeArgs,
        /// `empty` or `split:<file>`.
        #[arg(long, default_value = "empty")]
        generator: String,
        /// Comma-separated ordinals; defaults to all notations up to the
        /// root rank with coefficients at most 3.
        #[arg(long)]
        budget: Option<String>,
        /// Prefix depth of the preservation check; defaults to the support
        /// depth of the input.
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Parse, measure, decompose and optionally sample, with a pass/fail
    /// line per assertion.
    Report {
        #[command(flatten)]
        code: CodeArgs,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long)]
        point: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct CodeArgs {
    /// An expression, or `@path` to read one from a file.
    pub expr: String,
    /// Push complements to the leaves.
    #[arg(long)]
    pub normalize: bool,
    /// Fuse same-kind chains (implies --normalize).
    #[arg(long)]
    pub alternating: bool,
    /// Annotate height ranks and set the root rank to this notation.
    #[arg(long)]
    pub rank: Option<String>,
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// Number of Monte Carlo samples.
    #[arg(long)]
    pub mc: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub class: &'static str,
    pub message: String,
}

impl CliError {
    fn parse(m: impl ToString) -> Self {
        CliError { code: 2, class: "parse", message: m.to_string() }
    }
    fn invalid(m: impl ToString) -> Self {
        CliError { code: 3, class: "validation", message: m.to_string() }
    }
    fn certificate(m: impl ToString) -> Self {
        CliError { code: 4, class: "certificate", message: m.to_string() }
    }
    fn statistical(m: impl ToString) -> Self {
        CliError { code: 5, class: "statistical", message: m.to_string() }
    }
}

/// Runs a command. On failure the report is still produced, with an
/// `error` field, alongside the error.
pub fn run(cli: &Cli) -> (Value, Option<CliError>) {
    let (verb, input) = describe(&cli.verb);
    let mut report = json!({
        "schema": SCHEMA,
        "verb": verb,
        "input_digest": digest(verb, &input, &cli.verb),
    });
    let outcome = match &input {
        Ok(_) => execute(&cli.verb, input.as_deref().unwrap_or("")),
        Err(e) => Err(e.clone()),
    };
    let obj = report.as_object_mut().unwrap();
    let err = match outcome {
        Ok((fields, err)) => {
            obj.extend(fields);
            err
        }
        Err(e) => Some(e),
    };
    if let Some(e) = &err {
        obj.insert("error".into(), json!({"class": e.class, "code": e.code, "message": e.message}));
    }
    (report, err)
}

/// Parses `args` (including the program name) and runs them.
pub fn run_args<I, T>(args: I) -> Result<(Value, Option<CliError>), clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    Ok(run(&cli))
}

fn describe(verb: &Verb) -> (&'static str, Result<String, CliError>) {
    let read = |p: &PathBuf| std::fs::read_to_string(p).map_err(|e| CliError::invalid(format!("{}: {e}", p.display())));
    let expr = |c: &CodeArgs| match c.expr.strip_prefix('@') {
        Some(path) => read(&PathBuf::from(path)),
        None => Ok(c.expr.clone()),
    };
    match verb {
        Verb::Parse(c) => ("parse", expr(c)),
        Verb::Eval { code, .. } => ("eval", expr(code)),
        Verb::Measure { code, .. } => ("measure", expr(code)),
        Verb::Decompose(c) => ("decompose", expr(c)),
        Verb::TestsCombine { file, .. } => ("tests-combine", read(file)),
        Verb::Decorate { code, .. } => ("decorate", expr(code)),
        Verb::Report { code, .. } => ("report", expr(code)),
    }
}

/// SHA-256 over the verb, the input text and the parsed options.
fn digest(verb: &str, input: &Result<String, CliError>, args: &Verb) -> String {
    let mut h = Sha256::new();
    h.update(verb.as_bytes());
    h.update([0]);
    if let Ok(text) = input {
        h.update(text.as_bytes());
    }
    h.update([0]);
    h.update(format!("{args:?}").as_bytes());
    hex::encode(h.finalize())
}

type Fields = serde_json::Map<String, Value>;

fn execute(verb: &Verb, input: &str) -> Result<(Fields, Option<CliError>), CliError> {
    let mut out = Fields::new();
    let mut late: Option<CliError> = None;
    match verb {
        Verb::Parse(args) => {
            let c = load(args, input)?;
            summarize(&c, &mut out);
        }
        Verb::Eval { code, point } => {
            let c = load(code, input)?;
            let x: Point = point.parse().map_err(CliError::invalid)?;
            eval_fields(&c, &x, &mut out)?;
        }
        Verb::Measure { code, mc } => {
            let c = load(code, input)?;
            let exact = measure_of_code(&c);
            out.insert("measure".into(), json!(exact.to_string()));
            if let Some(n) = mc.mc {
                late = mc_fields(&c, &exact, n, mc.seed, &mut out)?;
            }
        }
        Verb::Decompose(args) => {
            let c = complement_free(load(args, input)?);
            decompose_fields(&c, &mut out)?;
        }
        Verb::TestsCombine { depth, .. } => {
            late = combine_fields(input, *depth, &mut out)?;
        }
        Verb::Decorate { code, generator, budget, depth } => {
            let c = load(code, input)?;
            late = decorate_fields(&c, generator, budget.as_deref(), *depth, &mut out)?;
        }
        Verb::Report { code, mc, point } => {
            let c = load(code, input)?;
            let mut checks = Vec::new();
            summarize(&c, &mut out);
            let exact = measure_of_code(&c);
            out.insert("measure".into(), json!(exact.to_string()));
            let base = complement_free(c.clone());
            let verified = decompose_fields(&base, &mut out);
            checks.push(json!({"assertion": "decomposition verifies", "pass": verified.is_ok()}));
            if let Err(e) = verified {
                late = Some(e);
            }
            if let Some(p) = point {
                let x: Point = p.parse().map_err(CliError::invalid)?;
                let ok = eval_fields(&base, &x, &mut out).is_ok();
                checks.push(json!({"assertion": "evaluation clauses hold", "pass": ok}));
                if !ok && late.is_none() {
                    late = Some(CliError::certificate("evaluation clauses fail"));
                }
            }
            if let Some(n) = mc.mc {
                let gate = mc_fields(&c, &exact, n, mc.seed, &mut out)?;
                checks.push(json!({"assertion": "estimate within tolerance", "pass": gate.is_none()}));
                late = late.or(gate);
            }
            out.insert("assertions".into(), Value::Array(checks));
        }
    }
    Ok((out, late))
}

fn load(args: &CodeArgs, text: &str) -> Result<BorelCode, CliError> {
    let mut c = dsl::parse(text).map_err(CliError::parse)?;
    if args.normalize {
        c = c.normalize_demorgan();
    }
    if args.alternating {
        c = c.make_alternating();
    }
    if let Some(r) = &args.rank {
        let root: Ordinal = r.parse().map_err(CliError::invalid)?;
        c = complement_free(c).with_height_ranks().with_rank(root);
        if let Some(a) = c.rank_violation() {
            return Err(CliError::invalid(format!("rank {r} breaks the rank laws at {a}")));
        }
    }
    Ok(c)
}

fn complement_free(c: BorelCode) -> BorelCode {
    if c.is_complement_free() {
        c
    } else {
        c.normalize_demorgan()
    }
}

fn summarize(c: &BorelCode, out: &mut Fields) {
    out.insert("canonical".into(), json!(dsl::print(c)));
    out.insert("nodes".into(), json!(c.node_count()));
    out.insert("height".into(), json!(c.height()));
    out.insert("support_depth".into(), json!(c.support_depth()));
    out.insert("complement_free".into(), json!(c.is_complement_free()));
    out.insert("alternating".into(), json!(c.is_alternating()));
    if let Some(r) = c.rank() {
        out.insert("rank".into(), json!(r.to_string()));
    }
}

fn eval_fields(c: &BorelCode, x: &Point, out: &mut Fields) -> Result<(), CliError> {
    let base = complement_free(c.clone());
    let m = evaluate(&base, x).map_err(CliError::invalid)?;
    out.insert("member".into(), json!(m.root()));
    out.insert("point".into(), json!(x.to_string()));
    out.insert("evaluated_nodes".into(), json!(m.len()));
    if let Some(a) = m.check_clauses(&base, x) {
        return Err(CliError::certificate(format!("evaluation clause fails at {a}")));
    }
    Ok(())
}

/// `|Δ|` must not exceed five standard deviations of a fair coin average,
/// `2.5/√N`, which is at most 0.01 once `N ≥ 62500`.
fn mc_tolerance(n: u64) -> f64 {
    2.5 / (n as f64).sqrt()
}

fn mc_fields(
    c: &BorelCode,
    exact: &crate::dyadic::Dyadic,
    n: u64,
    seed: u64,
    out: &mut Fields,
) -> Result<Option<CliError>, CliError> {
    let base = complement_free(c.clone());
    let est = mc_integral(&Integrand::code(&base), &Point::seeded(seed), n).map_err(CliError::invalid)?;
    let delta = (est.to_f64() - exact.to_f64()).abs();
    let tolerance = mc_tolerance(n);
    out.insert("exact".into(), json!(exact.to_string()));
    out.insert(
        "estimate".into(),
        json!({
            "value": est.value.to_string(),
            "approx": est.to_f64(),
            "trials": est.trials,
            "seed": seed,
        }),
    );
    out.insert("delta".into(), json!(delta));
    out.insert("tolerance".into(), json!(tolerance));
    Ok((delta > tolerance).then(|| CliError::statistical(format!("|Δ| = {delta} exceeds {tolerance}"))))
}

fn decompose_fields(c: &BorelCode, out: &mut Fields) -> Result<(), CliError> {
    let d = build_decomposition(c).map_err(CliError::invalid)?;
    let names: Vec<Value> = d
        .names()
        .iter()
        .map(|(a, n)| {
            json!({
                "address": a.to_string(),
                "integral": n.integral().lo().to_string(),
                "depth": n.best_approximation().0.depth(),
            })
        })
        .collect();
    out.insert("addresses".into(), json!(names.len()));
    out.insert("names".into(), Value::Array(names));
    let verified = verify_decomposition(c, &d);
    out.insert("verified".into(), json!(verified.is_ok()));
    match verified {
        Ok(()) => Ok(()),
        Err(e @ MeasureError::Law(_)) => Err(CliError::certificate(e)),
        Err(e) => Err(CliError::invalid(e)),
    }
}

#[derive(serde::Deserialize)]
struct TestFile {
    tests: Vec<TestEntry>,
    #[serde(default = "diagonal")]
    schedule: Schedule,
}

fn diagonal() -> Schedule {
    Schedule::Diagonal
}

#[derive(serde::Deserialize)]
struct TestEntry {
    label: String,
    levels: Vec<OpenSet>,
}

fn combine_fields(text: &str, stages: usize, out: &mut Fields) -> Result<Option<CliError>, CliError> {
    let file: TestFile = serde_json::from_str(text).map_err(CliError::parse)?;
    let mut tests = Vec::new();
    let mut levels = 0;
    for t in file.tests {
        levels = levels.max(t.levels.len());
        let mut levels = Vec::new();
        for (j, o) in t.levels.into_iter().enumerate() {
            let checked = OpenSet::from_stages(o.stages().to_vec())
                .map_err(|e| CliError::invalid(format!("{} level {j}: {e}", t.label)))?;
            levels.push(checked);
        }
        tests.push(RapidGDelta::from_table(t.label, LevelTable { levels }));
    }
    let combined = combine("combined", tests.clone(), file.schedule);
    let mut rows = Vec::new();
    let mut late = None;
    let mut contained = true;
    for j in 0..levels.max(1) {
        let mut measures = Vec::new();
        for s in 0..stages {
            match combined.stage(j, s) {
                Ok(set) => {
                    measures.push(json!(set.measure().to_string()));
                    for (n, t) in tests.iter().enumerate().take(file.schedule.bound(s) + 1) {
                        let part = t.stage_unchecked(n + j + 1, s).map_err(CliError::invalid)?;
                        contained &= part.is_subset(&set);
                    }
                }
                Err(e) => {
                    late.get_or_insert(CliError::certificate(&e));
                    measures.push(json!(null));
                }
            }
        }
        rows.push(json!({
            "level": j,
            "budget": crate::dyadic::Dyadic::pow2(-(j as i64)).to_string(),
            "stages": measures,
        }));
    }
    out.insert("tests".into(), json!(tests.len()));
    out.insert("levels".into(), Value::Array(rows));
    out.insert("inputs_contained".into(), json!(contained));
    if !contained && late.is_none() {
        late = Some(CliError::certificate("an input stage is not contained in the combination"));
    }
    Ok(late)
}

fn decorate_fields(
    c: &BorelCode,
    generator: &str,
    budget: Option<&str>,
    depth: Option<usize>,
    out: &mut Fields,
) -> Result<Option<CliError>, CliError> {
    let t = if c.rank().is_some() { c.clone() } else { complement_free(c.clone()).make_alternating().with_height_ranks() };
    let root = t.rank().cloned().unwrap_or_else(Ordinal::one);
    let budget = match budget {
        Some(b) => b.parse::<Budget>().map_err(CliError::invalid)?,
        None => Budget::default_for(&root),
    };
    let gen: Box<dyn DecorationGenerator> = match generator.split_once(':') {
        None if generator == "empty" => Box::new(EmptyGenerator),
        Some(("split", path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::invalid(format!("{path}: {e}")))?;
            Box::new(SplitGenerator::from_json(&text).map_err(CliError::invalid)?)
        }
        _ => return Err(CliError::invalid(format!("unknown generator {generator:?}"))),
    };
    let d = decorate(&t, gen.as_ref(), &budget).map_err(CliError::invalid)?;
    let depth = depth.unwrap_or_else(|| t.support_depth()).min(MAX_POINT_DEPTH);
    let points: Vec<Point> = Bits::all_of_length(depth).map(|p| Point::constant(false).tail_append(&p)).collect();
    let report = check_preservation(&t, &d, &points);
    out.insert("generator".into(), json!(gen.describe()));
    out.insert("budget".into(), json!(budget.to_string()));
    out.insert("rank".into(), json!(root.to_string()));
    out.insert("distinct_nodes".into(), json!(d.code.distinct_node_count()));
    out.insert("rank_preserved".into(), json!(d.code.rank() == Some(&root) && d.code.rank_violation().is_none()));
    out.insert("alternating".into(), json!(d.code.is_alternating_shared()));
    out.insert("preservation".into(), serde_json::to_value(&report).expect("plain data"));
    Ok((!report.passed()).then(|| CliError::certificate(format!("{} preservation failures", report.failures.len()))))
}
