//! Command-line front end. Graph documents flow through stdin and stdout.
//!
//! Exit codes: 0 success or property holds, 1 property fails, 2 budget or
//! size limit exceeded, 3 parse or schema error, 4 usage error.
//!
//! With `--porcelain`, check results are printed one per line as
//! `check<TAB>name<TAB>pass|fail|skip<TAB>detail`.

use std::io::{Read, Write};

use clap::{Args, Parser, Subcommand};

use crate::completion::{complete, witness_report, Budget, ClauseStatus, LeveledUniverse};
use crate::dred::{dred_complete, dred_extend, verify_dred, Dred, DredLeveledUniverse};
use crate::error::{Error, Result};
use crate::graph::{ExtensionalDigraph, NodeId};
use crate::io::{deserialize, dred_to_dot, serialize, to_dot, GraphDocument};
use crate::logic::{check_axiom, define_class, parse, Axiom, Env, Formula, Prepared};
use crate::oracle::{compare, oracle_complete, Verdict};
use crate::seeds::{assemble, quine_atoms, von_neumann_seed, CodeSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_USAGE: i32 = 4;

/// Overrides the default subset-enumeration budget.
pub const BUDGET_ENV: &str = "SETFORGE_MAX_SUBSETS";

#[derive(Parser, Debug)]
#[command(name = "setforge", version, about = "Deficiency completions of extensional digraphs")]
struct Cli {
    /// Machine-readable tab-separated check records.
    #[arg(long, global = true)]
    porcelain: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a seed graph: `empty`, `vn K`, `quine N`, or `--spec FILE`.
    Seed {
        kind: Option<String>,
        arg: Option<u32>,
        #[arg(long, value_name = "FILE")]
        spec: Option<String>,
    },
    /// Add completion levels to the document on stdin.
    Complete {
        #[arg(long)]
        levels: usize,
        /// Maximum number of subsets enumerated per step.
        #[arg(long)]
        budget: Option<u64>,
        /// Track depth and ranks (the input must carry them or be well founded).
        #[arg(long)]
        dred: bool,
    },
    /// Check an axiom, the witness report, or the depth-rank conditions.
    Check(CheckArgs),
    /// Evaluate a formula under variable bindings.
    Eval {
        #[arg(long)]
        formula: String,
        #[arg(long = "bind", value_name = "VAR=ID")]
        bind: Vec<String>,
    },
    /// List the nodes satisfying a formula with one free variable.
    Define {
        #[arg(long)]
        formula: String,
    },
    /// Compare the completion with the independent oracle.
    OracleCompare {
        #[arg(long)]
        levels: usize,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Write DOT text to PATH (`-` for stdout).
    Export {
        #[arg(long, value_name = "PATH")]
        dot: String,
    },
    /// Compare two document files up to isomorphism.
    Diff { a: String, b: String },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct CheckArgs {
    #[arg(long)]
    axiom: Option<String>,
    #[arg(long)]
    witness_report: bool,
    #[arg(long)]
    dred_conditions: bool,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BudgetExceeded { .. } | Error::SizeLimit { .. } => EXIT_BUDGET,
        Error::Parse { .. }
        | Error::Schema { .. }
        | Error::InvalidSpec(_)
        | Error::DanglingEdge(..)
        | Error::DuplicateNode(_) => EXIT_PARSE,
        Error::UnboundVariable(_) | Error::Arity(_) | Error::InvalidArgument(_) | Error::UnknownNode(_) => EXIT_USAGE,
        Error::NonExtensional(..)
        | Error::ExtensionalityClash { .. }
        | Error::DredCondition { .. }
        | Error::NotDred(_)
        | Error::EmptyExtension(_)
        | Error::Decoration(_) => EXIT_FAIL,
    }
}

struct Ctx<'a> {
    stdin: &'a mut dyn Read,
    out: &'a mut dyn Write,
    porcelain: bool,
}

impl Ctx<'_> {
    fn read_doc(&mut self) -> Result<GraphDocument> {
        let mut text = String::new();
        self.stdin
            .read_to_string(&mut text)
            .map_err(|e| Error::Schema {
                path: "$".into(),
                message: format!("cannot read stdin: {e}"),
            })?;
        deserialize(&text)
    }

    fn emit(&mut self, text: &str) -> Result<()> {
        self.out.write_all(text.as_bytes()).map_err(io_error)
    }

    fn line(&mut self, text: &str) -> Result<()> {
        self.emit(text)?;
        self.emit("\n")
    }

    /// One check record; returns whether it passed.
    fn record(&mut self, name: &str, status: &str, detail: &str) -> Result<()> {
        if self.porcelain {
            self.line(&format!("check\t{name}\t{status}\t{}", detail.replace(['\t', '\n'], " ")))
        } else if detail.is_empty() {
            self.line(&format!("{name}: {status}"))
        } else {
            self.line(&format!("{name}: {status} ({detail})"))
        }
    }
}

fn io_error(e: std::io::Error) -> Error {
    Error::InvalidArgument(format!("i/o error: {e}"))
}

fn read_file(path: &str) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("cannot read {path}: {e}")))
}

fn budget(flag: Option<u64>) -> Result<Budget> {
    let subsets = match flag {
        Some(b) => b,
        None => match std::env::var(BUDGET_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("{BUDGET_ENV} must be a positive integer")))?,
            Err(_) => Budget::DEFAULT_MAX_SUBSETS,
        },
    };
    Budget::with_max_subsets(subsets)
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, S>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let mut ctx = Ctx {
        stdin,
        out: stdout,
        porcelain: cli.porcelain,
    };
    match dispatch(cli.command, &mut ctx) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: Command, ctx: &mut Ctx<'_>) -> Result<i32> {
    match command {
        Command::Seed { kind, arg, spec } => cmd_seed(ctx, kind, arg, spec),
        Command::Complete { levels, budget: b, dred } => cmd_complete(ctx, levels, budget(b)?, dred),
        Command::Check(args) => cmd_check(ctx, args),
        Command::Eval { formula, bind } => cmd_eval(ctx, &formula, &bind),
        Command::Define { formula } => {
            let doc = ctx.read_doc()?;
            let f = resolve_formula(&doc, &formula)?;
            let class = define_class(&doc.graph()?, &f)?;
            let ids: Vec<String> = class.iter().map(|x| x.to_string()).collect();
            ctx.line(&ids.join(" "))?;
            Ok(EXIT_OK)
        }
        Command::OracleCompare { levels, budget: b } => {
            let doc = ctx.read_doc()?;
            let g = doc.graph()?;
            let b = budget(b)?;
            let ours = complete(&g, levels, &b)?;
            let theirs = oracle_complete(&g, levels, &b)?;
            report_verdict(ctx, "oracle-compare", &compare(ours.graph(), &theirs)?)
        }
        Command::Export { dot } => {
            let doc = ctx.read_doc()?;
            let text = match doc.dred()? {
                Some(h) => dred_to_dot(&h),
                None => to_dot(&doc.graph()?),
            };
            if dot == "-" {
                ctx.emit(&text)?;
            } else {
                std::fs::write(&dot, text).map_err(|e| Error::InvalidArgument(format!("cannot write {dot}: {e}")))?;
            }
            Ok(EXIT_OK)
        }
        Command::Diff { a, b } => {
            let (da, db) = (deserialize(&read_file(&a)?)?, deserialize(&read_file(&b)?)?);
            if serialize(&da) == serialize(&db) {
                ctx.record("diff", "pass", "identical")?;
                return Ok(EXIT_OK);
            }
            report_verdict(ctx, "diff", &compare(&da.graph()?, &db.graph()?)?)
        }
    }
}

fn report_verdict(ctx: &mut Ctx<'_>, name: &str, v: &Verdict) -> Result<i32> {
    match v {
        Verdict::Isomorphic => {
            ctx.record(name, "pass", "isomorphic")?;
            Ok(EXIT_OK)
        }
        Verdict::NotIsomorphic { invariant, left, right } => {
            ctx.record(name, "fail", &format!("{invariant}: {left} vs {right}"))?;
            Ok(EXIT_FAIL)
        }
    }
}

fn cmd_seed(ctx: &mut Ctx<'_>, kind: Option<String>, arg: Option<u32>, spec: Option<String>) -> Result<i32> {
    let doc = match (kind.as_deref(), spec) {
        (None, Some(path)) => {
            let text = read_file(&path)?;
            let spec: CodeSpec = serde_json::from_str(&text).map_err(|e| Error::Schema {
                path: path.clone(),
                message: e.to_string(),
            })?;
            let a = assemble(&spec)?;
            match &a.dred {
                Some(h) => GraphDocument::from_dred(h),
                None => GraphDocument::from_graph(&a.graph),
            }
        }
        (Some("empty"), None) => GraphDocument::from_graph(&ExtensionalDigraph::empty()),
        (Some(k), None) if k.eq_ignore_ascii_case("vn") => {
            let k = arg.ok_or_else(|| Error::InvalidArgument("`seed vn` needs a stage".into()))?;
            GraphDocument::from_graph(&von_neumann_seed(k)?)
        }
        (Some("quine"), None) => {
            let n = arg.ok_or_else(|| Error::InvalidArgument("`seed quine` needs a count".into()))?;
            let labels: Vec<String> = if n == 1 {
                vec!["a".into()]
            } else {
                (0..n).map(|i| format!("a{i}")).collect()
            };
            let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
            GraphDocument::from_graph(&quine_atoms(&refs)?)
        }
        _ => {
            return Err(Error::InvalidArgument(
                "expected `seed empty`, `seed vn K`, `seed quine N` or `seed --spec FILE`".into(),
            ))
        }
    };
    ctx.emit(&serialize(&doc))?;
    Ok(EXIT_OK)
}

fn cmd_complete(ctx: &mut Ctx<'_>, levels: usize, budget: Budget, dred: bool) -> Result<i32> {
    let doc = ctx.read_doc()?;
    let out = if dred {
        let h = match doc.dred()? {
            Some(h) => h,
            None => Dred::well_founded(doc.graph()?)?,
        };
        let du = match doc.universe()? {
            Some(u) => {
                let start = DredLeveledUniverse::from_parts(u, h.depth_map().clone(), h.rank_family().clone());
                if let Some((condition, detail)) = verify_dred(&start.dred()).first_failure() {
                    return Err(Error::NotDred(format!("condition {condition}: {detail}")));
                }
                dred_extend(&start, levels, &budget)?
            }
            None => dred_complete(&h, levels, &budget)?,
        };
        GraphDocument::from_dred_universe(&du)
    } else {
        let u = match doc.universe()? {
            Some(u) => extend(u, levels, &budget)?,
            None => complete(&doc.graph()?, levels, &budget)?,
        };
        GraphDocument::from_universe(&u)
    };
    let mut out = out;
    out.formulas = doc.formulas;
    ctx.emit(&serialize(&out))?;
    Ok(EXIT_OK)
}

fn extend(mut u: LeveledUniverse, levels: usize, budget: &Budget) -> Result<LeveledUniverse> {
    for _ in 0..levels {
        u = crate::completion::complete_step(&u, budget)?;
    }
    Ok(u)
}

fn cmd_check(ctx: &mut Ctx<'_>, args: CheckArgs) -> Result<i32> {
    let doc = ctx.read_doc()?;
    let mut ok = true;
    if let Some(name) = args.axiom {
        let axiom: Axiom = name.parse()?;
        let r = check_axiom(&doc.graph()?, axiom);
        let detail: Vec<String> = r
            .counterexamples
            .iter()
            .take(16)
            .map(|c| c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        let detail = if detail.is_empty() {
            String::new()
        } else {
            format!("counterexamples: {}", detail.join(" "))
        };
        ctx.record(axiom.name(), if r.passed { "pass" } else { "fail" }, &detail)?;
        ok = r.passed;
    } else if args.witness_report {
        let u = match doc.universe()? {
            Some(u) => u,
            None => LeveledUniverse::from_seed(doc.graph()?)?,
        };
        for r in witness_report(&u).results {
            let name = format!("{}@{}", r.clause, r.level);
            let (status, detail) = match &r.status {
                ClauseStatus::Pass => ("pass", format!("{} checked", r.checked)),
                ClauseStatus::Fail => {
                    ok = false;
                    ("fail", format!("{} of {} failed; first {:?}", r.failures, r.checked, r.counterexamples.first()))
                }
                ClauseStatus::Skipped(why) => ("skip", why.clone()),
            };
            ctx.record(&name, status, &detail)?;
        }
    } else {
        let h = doc.dred()?.ok_or_else(|| Error::Schema {
            path: "depth".into(),
            message: "document carries no depth and ranks".into(),
        })?;
        let r = verify_dred(&h);
        let rows: [(&str, bool, String); 4] = [
            (
                "condition1",
                r.extensionality.is_none(),
                r.extensionality.map(|(a, b)| format!("{a} {b}")).unwrap_or_default(),
            ),
            (
                "condition2",
                r.missing_depth.is_empty() && r.condition2.is_empty(),
                pairs(&r.condition2),
            ),
            ("condition3", r.condition3.is_empty(), pairs(&r.condition3)),
            (
                "condition4",
                r.condition4.is_empty(),
                r.condition4.first().map(|v| format!("{v:?}")).unwrap_or_default(),
            ),
        ];
        for (name, pass, detail) in rows {
            ctx.record(name, if pass { "pass" } else { "fail" }, &detail)?;
            ok &= pass;
        }
    }
    Ok(if ok { EXIT_OK } else { EXIT_FAIL })
}

fn pairs(v: &[(NodeId, NodeId)]) -> String {
    v.iter().take(16).map(|(a, b)| format!("({a},{b})")).collect::<Vec<_>>().join(" ")
}

/// `@name` refers to the document's `formulas` block.
fn resolve_formula(doc: &GraphDocument, text: &str) -> Result<Formula> {
    match text.strip_prefix('@') {
        Some(name) => {
            let body = doc
                .formulas
                .as_ref()
                .and_then(|f| f.get(name))
                .ok_or_else(|| Error::InvalidArgument(format!("no formula named `{name}` in the document")))?;
            parse(body)
        }
        None => parse(text),
    }
}

fn cmd_eval(ctx: &mut Ctx<'_>, formula: &str, bind: &[String]) -> Result<i32> {
    let doc = ctx.read_doc()?;
    let f = resolve_formula(&doc, formula)?;
    let mut env = Env::new();
    for b in bind {
        let (var, id) = b
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("binding `{b}` is not VAR=ID")))?;
        let id: u32 = id
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("binding `{b}` needs a numeric node id")))?;
        env.insert(var.trim().to_string(), NodeId(id));
    }
    let g = doc.graph()?;
    let value = Prepared::new(&g, &f)?.eval(&env)?;
    ctx.line(if value { "true" } else { "false" })?;
    Ok(if value { EXIT_OK } else { EXIT_FAIL })
}
