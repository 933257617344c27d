//! The `uncal` command line.
//!
//! Exit codes: 0 success, 1 negative decision (not bisimilar, an axiom
//! failed), 2 user error (I/O, parse, type), 3 internal failure.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use uncal_core::axioms::{self, check_soundness, AxiomSchema, Report};
use uncal_core::graph::{self, Graph};
use uncal_core::lambdag::{translate, LgError};
use uncal_core::recursion::{self, EvalEnv, RecursionError};
use uncal_core::rewrite::{self, eta_man_expand, print_mu, to_mu, RewriteError};
use uncal_core::syntax::{parse_program, parse_term, Context, Pattern, Program};
use uncal_core::typing::{infer_open, TypedTerm};
use uncal_core::Error;

#[derive(Parser, Debug)]
#[command(name = "uncal", version, about = "UnCAL interpreter and equational toolkit")]
pub struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Typecheck a program (or one expression against it) and print judgments.
    Check {
        file: PathBuf,
        #[arg(short = 'e', long = "expr")]
        expr: Option<String>,
    },
    /// Evaluate `main` of FILE, or the given expression, to a normal form.
    Eval {
        file: PathBuf,
        #[arg(short = 'e', long = "expr")]
        expr: Option<String>,
    },
    /// Decide bisimilarity of two expressions; exit 0 iff bisimilar.
    Bisim {
        /// Program whose functions the expressions may call.
        file: Option<PathBuf>,
        #[arg(short = 'e', long = "expr", num_args = 1, required = true)]
        exprs: Vec<String>,
    },
    /// Normalize a call-free expression.
    Nf {
        #[arg(short = 'e', long = "expr")]
        expr: String,
    },
    /// Print the μ-term of an expression of type ⟨&⟩.
    Mu {
        #[arg(short = 'e', long = "expr")]
        expr: String,
    },
    /// Interpret an expression as a graph.
    Graph {
        #[arg(short = 'e', long = "expr")]
        expr: String,
        /// Write Graphviz output to OUT (`-` for stdout).
        #[arg(long, value_name = "OUT")]
        dot: Option<PathBuf>,
    },
    /// Print the λG translation of an expression.
    Lambda {
        #[arg(short = 'e', long = "expr")]
        expr: String,
    },
    /// Label paths from the roots up to a depth.
    Traces {
        #[arg(short = 'e', long = "expr")]
        expr: String,
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
    /// Check equation schemas on random instances; prints a JSON report.
    Axioms {
        #[arg(long)]
        schema: Option<String>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 6)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn user(message: impl Into<String>) -> CliError {
        CliError { code: 2, message: message.into() }
    }
}

impl<E: Into<Error>> From<E> for CliError {
    fn from(e: E) -> CliError {
        let e = e.into();
        let code = match &e {
            Error::Rewrite(RewriteError::FuelExhausted(_))
            | Error::Recursion(RecursionError::Rewrite(RewriteError::FuelExhausted(_)))
            | Error::Lambda(LgError::FuelExhausted(_)) => 3,
            _ => 2,
        };
        CliError { code, message: e.to_string() }
    }
}

/// What a command printed and the exit code it asks for.
pub struct Outcome {
    pub stdout: String,
    pub code: u8,
}

impl Outcome {
    fn ok(stdout: String) -> Outcome {
        Outcome { stdout, code: 0 }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::user(format!("{}: {}", path.display(), e)))
}

fn load(path: &Path) -> Result<Program, CliError> {
    Ok(parse_program(&read(path)?)?)
}

fn pure(expr: &str) -> Result<TypedTerm, CliError> {
    Ok(infer_open(&parse_term(expr)?)?)
}

fn markers(c: &Context) -> Value {
    c.iter().map(|m| m.to_string()).collect()
}

fn term_json(t: &TypedTerm) -> Value {
    json!({ "source": markers(t.source()), "target": markers(t.target()), "term": t.to_string() })
}

/// The η!-expanded form when the target is a single marker.
fn canonical(t: TypedTerm) -> Result<TypedTerm, CliError> {
    if t.target().len() == 1 {
        Ok(eta_man_expand(&t)?)
    } else {
        Ok(t)
    }
}

pub fn graph_json(g: &Graph) -> Value {
    json!({
        "vertices": g.vertex_count(),
        "edges": g.edges().iter().map(|(v, l, u)| json!({
            "from": v,
            "label": l.as_ref().map(|l| l.text().to_string()),
            "to": u,
        })).collect::<Vec<_>>(),
        "roots": g.in_markers().iter().zip(g.roots()).map(|(m, v)| json!({ "marker": m.to_string(), "vertex": v })).collect::<Vec<_>>(),
        "outputs": g.outputs().map(|(v, m)| json!({ "vertex": v, "marker": m.to_string() })).collect::<Vec<_>>(),
    })
}

fn report_json(r: &Report) -> Value {
    json!({
        "schema": r.schema,
        "trials": r.trials,
        "passed": r.passed(),
        "failures": r.failures.iter().map(|f| json!({
            "trial": f.trial,
            "assignment": f.assignment.iter().map(|(k, v)| json!([k, v])).collect::<Vec<_>>(),
            "lhs": f.lhs,
            "rhs": f.rhs,
        })).collect::<Vec<_>>(),
    })
}

fn lines(v: impl IntoIterator<Item = String>) -> String {
    v.into_iter().map(|l| l + "\n").collect()
}

fn pattern_text(p: &Pattern) -> String {
    match p {
        Pattern::Concrete(l) => l.to_string(),
        Pattern::Var { name, excluded } if excluded.is_empty() => name.clone(),
        Pattern::Var { name, excluded } => {
            let ex: Vec<String> = excluded.iter().map(|l| l.to_string()).collect();
            format!("{} /= {}", name, ex.join(", "))
        }
        Pattern::Nil => "{}".to_string(),
    }
}

fn check(file: &Path, expr: Option<&str>, as_json: bool) -> Result<Outcome, CliError> {
    let env = EvalEnv::new(load(file)?)?;
    let mut defs = Vec::new();
    let mut text = Vec::new();
    for name in env.program().sfuns.keys() {
        let def = env.def(name).ok_or_else(|| CliError::user(format!("unknown function `{}`", name)))?;
        let clauses: Vec<(String, String)> = def
            .clauses()
            .iter()
            .map(|(p, b)| (pattern_text(p), format!("{} ⊢ {} : {}", b.source(), b, b.target())))
            .collect();
        text.push(format!("sfun {} ({}, k = {}) over {}", name, def.mode, def.k(), def.w()));
        text.extend(clauses.iter().map(|(p, j)| format!("  {}: {}", p, j)));
        let clauses: Vec<Value> = clauses.iter().map(|(p, j)| json!({ "pattern": p, "judgment": j })).collect();
        defs.push(json!({ "name": name, "mode": def.mode.to_string(), "k": def.k(), "clauses": clauses }));
    }
    let raw = match expr {
        Some(e) => Some(parse_term(e)?),
        None => env.program().main.clone(),
    };
    let mut judgments = Vec::new();
    if let Some(raw) = raw {
        let source = Context::new(raw.free_markers())?;
        let t = uncal_core::typing::infer_with(&raw, &source, env.signatures())?;
        for j in t.judgments() {
            text.push(format!("{}{}", "  ".repeat(j.depth), j));
            judgments.push(json!({ "depth": j.depth, "judgment": j.to_string() }));
        }
    }
    Ok(Outcome::ok(if as_json {
        json!({ "functions": defs, "judgments": judgments }).to_string() + "\n"
    } else {
        lines(text)
    }))
}

fn eval(file: &Path, expr: Option<&str>, as_json: bool) -> Result<Outcome, CliError> {
    let env = EvalEnv::new(load(file)?)?;
    let raw = match expr {
        Some(e) => parse_term(e)?,
        None => env.program().main.clone().ok_or_else(|| CliError::user("no expression and no `main` in the program"))?,
    };
    let t = canonical(recursion::eval(&env, &raw)?.into_typed())?;
    Ok(Outcome::ok(if as_json { term_json(&t).to_string() } else { t.to_string() } + "\n"))
}

fn bisim(file: Option<&Path>, exprs: &[String], as_json: bool) -> Result<Outcome, CliError> {
    let [a, b] = exprs else {
        return Err(CliError::user("bisim takes exactly two -e expressions"));
    };
    let terms = match file {
        Some(f) => {
            let env = EvalEnv::new(load(f)?)?;
            let one = |e: &str| -> Result<TypedTerm, CliError> { Ok(recursion::eval(&env, &parse_term(e)?)?.into_typed()) };
            (one(a)?, one(b)?)
        }
        None => (pure(a)?, pure(b)?),
    };
    let same = graph::terms_bisimilar(&terms.0, &terms.1)?;
    let stdout = if as_json { json!({ "bisimilar": same }).to_string() } else { same.to_string() } + "\n";
    Ok(Outcome { stdout, code: if same { 0 } else { 1 } })
}

fn nf(expr: &str, as_json: bool) -> Result<Outcome, CliError> {
    let t = canonical(rewrite::normalize(&pure(expr)?)?.into_typed())?;
    Ok(Outcome::ok(if as_json { term_json(&t).to_string() } else { t.to_string() } + "\n"))
}

fn mu(expr: &str, as_json: bool) -> Result<Outcome, CliError> {
    let t = rewrite::normalize(&pure(expr)?)?.into_typed();
    let m = print_mu(&to_mu(&eta_man_expand(&t)?)?);
    Ok(Outcome::ok(if as_json { json!({ "mu": m }).to_string() } else { m } + "\n"))
}

fn graph_cmd(expr: &str, dot: Option<&Path>, as_json: bool) -> Result<Outcome, CliError> {
    let g = graph::interpret(&pure(expr)?)?;
    let mut stdout = String::new();
    match dot {
        Some(p) if p == Path::new("-") => stdout.push_str(&graph::to_dot(&g)),
        Some(p) => fs::write(p, graph::to_dot(&g)).map_err(|e| CliError::user(format!("{}: {}", p.display(), e)))?,
        None if !as_json => {
            for (v, l, u) in g.edges() {
                let l = l.as_ref().map_or("ε".to_string(), |l| l.to_string());
                stdout.push_str(&format!("{} -{}-> {}\n", v, l, u));
            }
            for (m, v) in g.in_markers().iter().zip(g.roots()) {
                stdout.push_str(&format!("root {} = {}\n", m, v));
            }
            for (v, m) in g.outputs() {
                stdout.push_str(&format!("output {} = {}\n", v, m));
            }
        }
        None => {}
    }
    if as_json {
        stdout.push_str(&(graph_json(&g).to_string() + "\n"));
    }
    Ok(Outcome::ok(stdout))
}

fn lambda(expr: &str, as_json: bool) -> Result<Outcome, CliError> {
    let t = translate(&pure(expr)?)?;
    Ok(Outcome::ok(if as_json { json!({ "lambda": t.to_string() }).to_string() } else { t.to_string() } + "\n"))
}

fn traces(expr: &str, depth: usize, as_json: bool) -> Result<Outcome, CliError> {
    let g = graph::interpret(&pure(expr)?)?;
    let ts = graph::trace_strings(&graph::traces(&g, depth)?);
    Ok(Outcome::ok(if as_json {
        json!({ "depth": depth, "traces": ts }).to_string() + "\n"
    } else {
        lines(ts)
    }))
}

fn axioms_cmd(schema: Option<&str>, trials: usize, size: usize, seed: u64) -> Result<Outcome, CliError> {
    let schemas: Vec<AxiomSchema> = match schema {
        Some(name) => vec![axioms::schema(name)?],
        None => axioms::axioms().into_iter().chain(axioms::derived()).collect(),
    };
    let reports: Vec<Report> = schemas.iter().map(|s| check_soundness(s, trials, size, seed)).collect();
    let passed = reports.iter().all(Report::passed);
    let body = json!({
        "seed": seed,
        "trials": trials,
        "size": size,
        "passed": passed,
        "reports": reports.iter().map(report_json).collect::<Vec<_>>(),
    });
    Ok(Outcome { stdout: serde_json::to_string_pretty(&body).expect("JSON values serialize") + "\n", code: if passed { 0 } else { 1 } })
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let j = cli.json;
    match &cli.command {
        Command::Check { file, expr } => check(file, expr.as_deref(), j),
        Command::Eval { file, expr } => eval(file, expr.as_deref(), j),
        Command::Bisim { file, exprs } => bisim(file.as_deref(), exprs, j),
        Command::Nf { expr } => nf(expr, j),
        Command::Mu { expr } => mu(expr, j),
        Command::Graph { expr, dot } => graph_cmd(expr, dot.as_deref(), j),
        Command::Lambda { expr } => lambda(expr, j),
        Command::Traces { expr, depth } => traces(expr, *depth, j),
        Command::Axioms { schema, trials, size, seed } => axioms_cmd(schema.as_deref(), *trials, *size, *seed),
    }
}
