//! Subcommand dispatch and reporting.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use laurent_ritt::chains::Connector;
use laurent_ritt::dickson::{dickson, dickson_plus, dickson_plus_factors, dickson_second};
use laurent_ritt::ritt_catalog::classify;
use laurent_ritt::selftest;
use laurent_ritt::{
    compose_all, BivariatePoly, CatalogueError, ChainError, CycloScalar, DecomposeError,
    Decomposer, Decomposition, LaurentPoly, Poly, RatFunc,
};
use serde_json::{json, Value};

use crate::config::{Config, ConfigError, Format, Overrides, MAX_DEGREE_ENV};
use crate::expr::{eval_str, EvalLimits, ExprError};

#[derive(Parser, Debug)]
#[command(
    name = "laurent-ritt",
    version,
    about = "Decompose Laurent polynomials under composition"
)]
struct Cli {
    /// JSON file with max_degree, max_conductor, max_frontier and format.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    max_degree: Option<u64>,
    #[arg(long, global = true)]
    max_conductor: Option<u32>,
    #[arg(long, global = true)]
    max_frontier: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the canonical form of an expression.
    Eval { expr: String },
    /// One complete decomposition, or all of them.
    Decompose {
        expr: String,
        #[arg(long)]
        all_chains: bool,
    },
    /// Whether the input is indecomposable, with a split when it is not.
    Indecomposable { expr: String },
    /// Classify a bidecomposition g1 ∘ h1 = g2 ∘ h2.
    Classify {
        #[arg(long)]
        g1: String,
        #[arg(long)]
        h1: String,
        #[arg(long)]
        g2: String,
        #[arg(long)]
        h2: String,
    },
    /// Join two complete decompositions, each given as factors separated by ';'.
    Connect {
        #[arg(long)]
        chain1: String,
        #[arg(long)]
        chain2: String,
    },
    /// Dickson polynomial D_N(x, alpha), or E_N with --second.
    Dickson {
        n: u32,
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long, conflicts_with = "alpha")]
        second: bool,
        #[arg(long, conflicts_with_all = ["alpha", "second"])]
        plus_factors: bool,
    },
    /// Run the identity suites.
    Selftest {
        #[arg(long)]
        deep: bool,
    },
}

/// A failure with its exit code: 1 for parse and precondition errors, 2 when no classification or
/// chain exists, 3 when a limit is hit.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            kind: "input",
            message: message.into(),
        }
    }
}

impl From<ExprError> for Failure {
    fn from(e: ExprError) -> Self {
        let (code, kind) = match e {
            ExprError::Parse { .. } => (1, "parse"),
            ExprError::Arity { .. } => (1, "arity"),
            ExprError::Eval(_) => (1, "eval"),
            ExprError::Limit(_) => (3, "limit"),
        };
        Failure {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure {
            code: 1,
            kind: "config",
            message: e.to_string(),
        }
    }
}

impl From<DecomposeError> for Failure {
    fn from(e: DecomposeError) -> Self {
        let (code, kind) = match e {
            DecomposeError::LimitExceeded(_) => (3, "limit"),
            _ => (1, "precondition"),
        };
        Failure {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

impl From<CatalogueError> for Failure {
    fn from(e: CatalogueError) -> Self {
        match e {
            CatalogueError::Decompose(d) => d.into(),
            CatalogueError::NotClassified(_) => Failure {
                code: 2,
                kind: "not_classified",
                message: e.to_string(),
            },
            _ => Failure {
                code: 1,
                kind: "precondition",
                message: e.to_string(),
            },
        }
    }
}

impl From<ChainError> for Failure {
    fn from(e: ChainError) -> Self {
        match e {
            ChainError::Decompose(d) => d.into(),
            ChainError::NotConnected(_) => Failure {
                code: 2,
                kind: "not_connected",
                message: e.to_string(),
            },
            ChainError::LimitExceeded(_) => Failure {
                code: 3,
                kind: "limit",
                message: e.to_string(),
            },
            ChainError::PreconditionViolated(_) => Failure {
                code: 1,
                kind: "precondition",
                message: e.to_string(),
            },
        }
    }
}

/// What a command produced: the JSON document and a human-oriented rendering.
struct Report {
    json: Value,
    text: String,
    /// Exit code when the command ran but reports a negative outcome (selftest failures).
    code: i32,
}

impl Report {
    fn ok(json: Value, text: String) -> Self {
        Report {
            json,
            text,
            code: 0,
        }
    }
}

/// Everything a run writes, kept separate from the process so tests can inspect it.
#[derive(Debug)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn with_version(mut v: Value) -> Value {
    if let Value::Object(m) = &mut v {
        m.insert("version".into(), json!(1));
    }
    v
}

fn to_json<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("serializable")
}

struct Ctx {
    config: Config,
}

impl Ctx {
    fn eval_limits(&self) -> EvalLimits {
        EvalLimits {
            max_degree: self.config.max_degree,
            max_conductor: self.config.max_conductor,
        }
    }

    fn expr(&self, text: &str) -> Result<RatFunc, Failure> {
        Ok(eval_str(text, &self.eval_limits())?)
    }

    fn decomposer(&self) -> Decomposer {
        Decomposer::new(self.config.limits())
    }
}

fn cmd_eval(ctx: &Ctx, text: &str) -> Result<Report, Failure> {
    let f = ctx.expr(text)?;
    let json = json!({
        "input": text,
        "result": to_json(&f),
        "text": f.to_string(),
        "degree": f.degree(),
        "laurent": f.is_laurent(),
    });
    Ok(Report::ok(json, f.to_string()))
}

fn laurent_input(f: &RatFunc) -> Result<LaurentPoly, Failure> {
    let l = f
        .as_laurent()
        .ok_or_else(|| Failure::input(format!("{f} is not a Laurent polynomial")))?;
    if l.is_constant() {
        return Err(Failure::input("input is constant"));
    }
    Ok(l)
}

fn cmd_decompose(ctx: &Ctx, text: &str, all: bool) -> Result<Report, Failure> {
    let f = ctx.expr(text)?;
    let l = laurent_input(&f)?;
    let mut dec = ctx.decomposer();
    let decs: Vec<Decomposition> = if all {
        dec.complete_decompositions(&l)?
    } else {
        let chains = dec.chains(&l)?;
        let first = chains.first().expect("a nonconstant input has a chain");
        vec![dec.certify(first.iter().map(|c| c.to_ratfunc()).collect())?]
    };
    let lines: Vec<String> = decs.iter().map(|d| d.to_string()).collect();
    let json = json!({
        "input": text,
        "f": to_json(&f),
        "count": decs.len(),
        "chains": to_json(&decs),
        "text": lines,
    });
    Ok(Report::ok(json, lines.join("\n")))
}

fn cmd_indecomposable(ctx: &Ctx, text: &str) -> Result<Report, Failure> {
    let f = ctx.expr(text)?;
    let l = laurent_input(&f)?;
    if l.degree() < 2 {
        return Err(Failure::input(format!("{f} has degree below 2")));
    }
    let mut dec = ctx.decomposer();
    if dec.is_indecomposable(&l)? {
        let json = json!({"input": text, "indecomposable": true, "witness": Value::Null});
        return Ok(Report::ok(json, "true".into()));
    }
    let chains = dec.chains(&l)?;
    let chain = &chains[0];
    let inner = chain.last().unwrap().to_ratfunc();
    let outer_factors: Vec<RatFunc> = chain[..chain.len() - 1]
        .iter()
        .map(|c| c.to_ratfunc())
        .collect();
    let outer = compose_all(&outer_factors);
    debug_assert_eq!(outer.compose(&inner), f);
    let text_out = format!("false: ({outer}) @ ({inner})");
    let json = json!({
        "input": text,
        "indecomposable": false,
        "witness": {"outer": to_json(&outer), "inner": to_json(&inner), "text": [outer.to_string(), inner.to_string()]},
    });
    Ok(Report::ok(json, text_out))
}

fn cmd_classify(ctx: &Ctx, g1: &str, h1: &str, g2: &str, h2: &str) -> Result<Report, Failure> {
    let fs = [ctx.expr(g1)?, ctx.expr(h1)?, ctx.expr(g2)?, ctx.expr(h2)?];
    let f = fs[0].compose(&fs[1]);
    if f.degree() > ctx.config.max_degree {
        return Err(Failure {
            code: 3,
            kind: "limit",
            message: format!("degree {} above {}", f.degree(), ctx.config.max_degree),
        });
    }
    let report = classify(&fs[0], &fs[1], &fs[2], &fs[3])?;
    let body = to_json(&report);
    let mut lines = vec![report.tag.clone()];
    for (k, p) in report.normalized.iter().enumerate() {
        lines.push(format!("pair {}: ({}) @ ({}) with mu = {}", k + 1, p.g, p.h, p.mu));
    }
    lines.push(format!("shape: {}", body["classification"]["shape"].as_str().unwrap_or("?")));
    if let Some(a) = &report.inner_shift {
        lines.push(format!("pairs taken as (g, h(x - {a}))"));
    }
    let text = lines.join("\n");
    let json = json!({
        "case": report.tag,
        "inner_shift": body["inner_shift"],
        "normalized": body["normalized"],
        "classification": body["classification"],
    });
    Ok(Report::ok(json, text))
}

fn parse_chain(ctx: &Ctx, text: &str) -> Result<Vec<RatFunc>, Failure> {
    let parts: Vec<&str> = text
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if parts.is_empty() {
        return Err(Failure::input("empty chain"));
    }
    parts.iter().map(|p| ctx.expr(p)).collect()
}

fn cmd_connect(ctx: &Ctx, c1: &str, c2: &str) -> Result<Report, Failure> {
    let (x, y) = (parse_chain(ctx, c1)?, parse_chain(ctx, c2)?);
    let mut conn = Connector::new(ctx.config.limits());
    let d1 = conn.decomposer().certify(x)?;
    let d2 = conn.decomposer().certify(y)?;
    let proof = conn.connect(&d1, &d2)?;
    let mut lines: Vec<String> = vec![format!("f = {}", proof.f)];
    for (k, d) in proof.decs.iter().enumerate() {
        lines.push(format!("{k}: {d}"));
        if let Some(m) = proof.moves.get(k) {
            lines.push(format!(
                "   move at {}: ({}) @ ({}) -> ({}) @ ({})",
                m.i, m.before.0, m.before.1, m.after.0, m.after.1
            ));
        }
    }
    let mut json = to_json(&proof);
    json["length"] = json!(proof.decs.len());
    Ok(Report::ok(json, lines.join("\n")))
}

fn cmd_dickson(
    ctx: &Ctx,
    n: u32,
    alpha: Option<&str>,
    second: bool,
    plus: bool,
) -> Result<Report, Failure> {
    if n as u64 > ctx.config.max_degree {
        return Err(ExprError::Limit(format!("degree {n} above {}", ctx.config.max_degree)).into());
    }
    if plus {
        if n == 0 {
            return Err(Failure::input("--plus-factors needs N >= 1"));
        }
        let (linear, quadratics) = dickson_plus_factors(n);
        let one = BivariatePoly::from_univariate(&Poly::one(), false);
        let product = linear
            .iter()
            .chain(&quadratics)
            .fold(one, |acc, q| &acc * q);
        let verified = product == dickson_plus(n);
        let mut lines: Vec<String> = linear
            .iter()
            .chain(&quadratics)
            .map(|q| q.to_string())
            .collect();
        lines.push(format!("product verified: {verified}"));
        let json = json!({
            "n": n,
            "linear": to_json(&linear),
            "quadratics": to_json(&quadratics),
            "product_verified": verified,
        });
        return Ok(Report::ok(json, lines.join("\n")));
    }
    let (kind, a, p) = if second {
        ("second", CycloScalar::one(), dickson_second(n))
    } else {
        let a = match alpha {
            None => CycloScalar::one(),
            Some(t) => ctx
                .expr(t)?
                .as_constant()
                .ok_or_else(|| Failure::input("--alpha must be a constant"))?,
        };
        let p = dickson(n, &a);
        ("first", a, p)
    };
    let json = json!({
        "n": n,
        "kind": kind,
        "alpha": to_json(&a),
        "poly": to_json(&p),
        "text": p.to_string(),
    });
    Ok(Report::ok(json, p.to_string()))
}

fn cmd_selftest(deep: bool) -> Report {
    let checks = selftest::run(deep);
    let ok = checks.iter().all(|c| c.ok());
    let mut lines = Vec::new();
    for c in &checks {
        lines.push(format!(
            "{}: {} ({} passed, {} failed)",
            c.name,
            if c.ok() { "PASS" } else { "FAIL" },
            c.passed,
            c.failed.len()
        ));
        lines.extend(c.failed.iter().take(5).map(|f| format!("  {f}")));
    }
    Report {
        json: json!({"deep": deep, "ok": ok, "suites": to_json(&checks)}),
        text: lines.join("\n"),
        code: if ok { 0 } else { 1 },
    }
}

fn dispatch(ctx: &Ctx, cmd: &Command) -> Result<Report, Failure> {
    match cmd {
        Command::Eval { expr } => cmd_eval(ctx, expr),
        Command::Decompose { expr, all_chains } => cmd_decompose(ctx, expr, *all_chains),
        Command::Indecomposable { expr } => cmd_indecomposable(ctx, expr),
        Command::Classify { g1, h1, g2, h2 } => cmd_classify(ctx, g1, h1, g2, h2),
        Command::Connect { chain1, chain2 } => cmd_connect(ctx, chain1, chain2),
        Command::Dickson {
            n,
            alpha,
            second,
            plus_factors,
        } => cmd_dickson(ctx, *n, alpha.as_deref(), *second, *plus_factors),
        Command::Selftest { deep } => Ok(cmd_selftest(*deep)),
    }
}

/// Runs one command line. `env_max_degree` is the value of `LAURENT_RITT_MAX_DEGREE`, if set.
pub fn run<I, T>(args: I, env_max_degree: Option<&str>) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let (stdout, stderr) = if code == 0 {
                (rendered, String::new())
            } else {
                (String::new(), rendered)
            };
            return Output {
                code,
                stdout,
                stderr,
            };
        }
    };
    let overrides = Overrides {
        max_degree: cli.max_degree,
        max_conductor: cli.max_conductor,
        max_frontier: cli.max_frontier,
        format: cli.format,
    };
    let config = Config::load(cli.config.as_deref(), env_max_degree, &overrides);
    let format = config
        .as_ref()
        .map(|c| c.format)
        .unwrap_or(cli.format.unwrap_or(Format::Json));
    let result = config
        .map_err(Failure::from)
        .and_then(|config| dispatch(&Ctx { config }, &cli.cmd));
    match result {
        Ok(r) => {
            let stdout = match format {
                Format::Json => serde_json::to_string_pretty(&with_version(r.json)).unwrap(),
                Format::Text => r.text,
            };
            Output {
                code: r.code,
                stdout: stdout + "\n",
                stderr: String::new(),
            }
        }
        Err(f) => {
            let stdout = match format {
                Format::Json => {
                    let doc = json!({"error": {"kind": f.kind, "message": f.message}});
                    serde_json::to_string_pretty(&with_version(doc)).unwrap() + "\n"
                }
                Format::Text => String::new(),
            };
            Output {
                code: f.code,
                stdout,
                stderr: format!("error: {}\n", f.message),
            }
        }
    }
}

/// Reads the environment and runs.
pub fn main_with_env() -> i32 {
    let env = std::env::var(MAX_DEGREE_ENV).ok();
    let out = run(std::env::args_os(), env.as_deref());
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    out.code
}
