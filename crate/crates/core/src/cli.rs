//! Command-line front end. Every invocation is described by a [`JobSpec`];
//! [`run`] turns one into an exit code and a report document.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cpoly::{ZeroDatum, C64};
use crate::error::Error;
use crate::hardy;
use crate::operators::{self, Side};
use crate::ratfun::{RatFunc, RatFuncJson};
use crate::staralg::{Invertibility, PhiContext, SimilarityReport, Verdict, RESIDUAL_TERMS};
use crate::tol::ToleranceConfig;

/// Default truncation dimension for `matrix` and `oracle`.
pub const DEFAULT_N: usize = 96;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(Error::PoleInDisc(_) | Error::PoleOnCircle(_) | Error::PhiZero) => 2,
            CliError::Lib(Error::BoundaryAmbiguous) => 3,
            CliError::Lib(Error::TruncationUnsound { .. }) => 4,
            _ => 1,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Analyze,
    Similar,
    Times,
    Circle,
    Invert,
    Matrix,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Text,
}

/// A rational function given inline or as a path to a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Input {
    Inline(RatFuncJson),
    Path(PathBuf),
}

/// One job: a command, its inputs and its output settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobSpec {
    pub command: Command,
    #[serde(default)]
    pub phi: Option<Input>,
    #[serde(default)]
    pub r: Option<Input>,
    #[serde(default)]
    pub s: Option<Input>,
    #[serde(default)]
    pub t: Option<Input>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub w: Option<[f64; 2]>,
    #[serde(default)]
    pub side: Option<Side>,
    /// Tolerance overrides by field name.
    #[serde(default)]
    pub tol: BTreeMap<String, f64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub pretty: bool,
}

impl JobSpec {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            phi: None,
            r: None,
            s: None,
            t: None,
            n: None,
            k: None,
            w: None,
            side: None,
            tol: BTreeMap::new(),
            output: None,
            format: Format::Json,
            pretty: false,
        }
    }

    /// Resolves relative input and output paths against `base`.
    fn rebase(mut self, base: &Path) -> Self {
        for input in [&mut self.phi, &mut self.r, &mut self.s, &mut self.t]
            .into_iter()
            .flatten()
        {
            if let Input::Path(p) = input {
                *p = base.join(&*p);
            }
        }
        if let Some(p) = &mut self.output {
            *p = base.join(&*p);
        }
        self
    }

    fn tolerances(&self) -> CliResult<ToleranceConfig> {
        let mut tol = ToleranceConfig::default();
        for (name, value) in &self.tol {
            tol.set(name, *value)?;
        }
        Ok(tol)
    }
}

/// Result of running one job: the exit code and the rendered report.
#[derive(Debug, Clone, PartialEq)]
pub struct JobOutcome {
    pub code: u8,
    pub report: String,
}

#[derive(Debug, Parser)]
#[command(name = "rankone", version, about = "Similarity of rank-one perturbations of the backward shift")]
struct Cli {
    /// Run every job of a JSON manifest (an array of jobs) concurrently.
    #[arg(long, value_name = "MANIFEST")]
    batch: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Sub>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Print Gamma_+ and Gamma_- of r with zero and order reports.
    Analyze(JobArgs),
    /// Decide similarity of U + r (x) phi and U + s (x) phi.
    Similar(JobArgs),
    /// Twisted product r x s.
    Times(JobArgs),
    /// Circle product r o s = r + s - r x s.
    Circle(JobArgs),
    /// Circle inverse of t.
    Invert(JobArgs),
    /// Export the N x N sections of U_r and K_r.
    Matrix(JobArgs),
    /// Compare numerical kernel dimensions with the closed formula.
    Oracle(JobArgs),
}

#[derive(Debug, Args)]
struct JobArgs {
    #[arg(long, value_name = "FILE")]
    phi: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    r: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    s: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    t: Option<PathBuf>,
    /// Truncation dimension.
    #[arg(long)]
    n: Option<usize>,
    /// Power of (T - w) for kernel dimensions.
    #[arg(long)]
    k: Option<usize>,
    /// Spectral point as "re,im".
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    w: Option<[f64; 2]>,
    #[arg(long, value_enum)]
    side: Option<Side>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
    /// Add human-readable fractions next to every function.
    #[arg(long)]
    pretty: bool,
    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Debug, Args)]
struct TolArgs {
    #[arg(long = "tol-eps-zero", alias = "tol-eps_zero", value_name = "X")]
    eps_zero: Option<f64>,
    #[arg(long = "tol-delta-cluster", alias = "tol-delta_cluster", value_name = "X")]
    delta_cluster: Option<f64>,
    #[arg(long = "tol-delta-boundary", alias = "tol-delta_boundary", value_name = "X")]
    delta_boundary: Option<f64>,
    #[arg(long = "tol-tau-pole", alias = "tol-tau_pole", value_name = "X")]
    tau_pole: Option<f64>,
    #[arg(long = "tol-tau-ord", alias = "tol-tau_ord", value_name = "X")]
    tau_ord: Option<f64>,
    #[arg(long = "tol-tau-unit", alias = "tol-tau_unit", value_name = "X")]
    tau_unit: Option<f64>,
    #[arg(long = "tol-eps-bezout", alias = "tol-eps_bezout", value_name = "X")]
    eps_bezout: Option<f64>,
    #[arg(long = "tol-eps-witness", alias = "tol-eps_witness", value_name = "X")]
    eps_witness: Option<f64>,
    #[arg(long = "tol-sigma-svd", alias = "tol-sigma_svd", value_name = "X")]
    sigma_svd: Option<f64>,
    #[arg(long = "tol-delta-match", alias = "tol-delta_match", value_name = "X")]
    delta_match: Option<f64>,
}

impl TolArgs {
    fn overrides(&self) -> BTreeMap<String, f64> {
        [
            ("eps_zero", self.eps_zero),
            ("delta_cluster", self.delta_cluster),
            ("delta_boundary", self.delta_boundary),
            ("tau_pole", self.tau_pole),
            ("tau_ord", self.tau_ord),
            ("tau_unit", self.tau_unit),
            ("eps_bezout", self.eps_bezout),
            ("eps_witness", self.eps_witness),
            ("sigma_svd", self.sigma_svd),
            ("delta_match", self.delta_match),
        ]
        .into_iter()
        .filter_map(|(name, v)| v.map(|v| (name.to_string(), v)))
        .collect()
    }
}

fn parse_point(s: &str) -> std::result::Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let parse = |x: &str| x.parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
    match parts.as_slice() {
        [re] => Ok([parse(re)?, 0.0]),
        [re, im] => Ok([parse(re)?, parse(im)?]),
        _ => Err(format!("expected \"re,im\", got `{s}`")),
    }
}

impl Sub {
    fn into_job(self) -> JobSpec {
        let (command, a) = match self {
            Sub::Analyze(a) => (Command::Analyze, a),
            Sub::Similar(a) => (Command::Similar, a),
            Sub::Times(a) => (Command::Times, a),
            Sub::Circle(a) => (Command::Circle, a),
            Sub::Invert(a) => (Command::Invert, a),
            Sub::Matrix(a) => (Command::Matrix, a),
            Sub::Oracle(a) => (Command::Oracle, a),
        };
        JobSpec {
            command,
            phi: a.phi.map(Input::Path),
            r: a.r.map(Input::Path),
            s: a.s.map(Input::Path),
            t: a.t.map(Input::Path),
            n: a.n,
            k: a.k,
            w: a.w,
            side: a.side,
            tol: a.tol.overrides(),
            output: a.output,
            format: a.format,
            pretty: a.pretty,
        }
    }
}

/// Parses arguments, runs the job or batch and returns the process exit code.
pub fn main<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match (cli.batch, cli.command) {
        (Some(_), Some(_)) => Err(CliError::Usage("--batch takes no subcommand".into())),
        (Some(manifest), None) => run_batch(&manifest),
        (None, Some(sub)) => emit(&sub.into_job()),
        (None, None) => Err(CliError::Usage("a subcommand or --batch is required".into())),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs one job and writes its report to the output file or stdout.
fn emit(job: &JobSpec) -> CliResult<u8> {
    let out = run(job)?;
    write_report(job, &out.report)?;
    Ok(out.code)
}

fn write_report(job: &JobSpec, report: &str) -> CliResult<()> {
    match &job.output {
        Some(path) => std::fs::write(path, report).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => {
            print!("{report}");
            Ok(())
        }
    }
}

/// Runs every job of a manifest in parallel. The summary lists jobs in
/// manifest order; the exit code is the first nonzero job code.
fn run_batch(manifest: &Path) -> CliResult<u8> {
    let text = read(manifest)?;
    let jobs: Vec<JobSpec> = serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: manifest.to_path_buf(),
        source,
    })?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let results: Vec<(u8, Value)> = jobs
        .into_par_iter()
        .map(|job| {
            let job = job.rebase(base);
            match run(&job).and_then(|out| {
                if job.output.is_some() {
                    write_report(&job, &out.report)?;
                }
                Ok(out)
            }) {
                Ok(out) => {
                    let report = match (&job.output, job.format) {
                        (Some(p), _) => json!(p.display().to_string()),
                        (None, Format::Json) => serde_json::from_str(&out.report).unwrap_or(Value::Null),
                        (None, _) => json!(out.report),
                    };
                    (out.code, json!({ "exit_code": out.code, "report": report }))
                }
                Err(e) => (
                    e.exit_code(),
                    json!({ "exit_code": e.exit_code(), "error": e.to_string() }),
                ),
            }
        })
        .collect();
    let code = results.iter().map(|(c, _)| *c).find(|c| *c != 0).unwrap_or(0);
    let summary: Vec<Value> = results.into_iter().map(|(_, v)| v).collect();
    println!("{}", to_json_string(&Value::Array(summary)));
    Ok(code)
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load(input: &Input, tol: &ToleranceConfig) -> CliResult<RatFunc> {
    let json = match input {
        Input::Inline(j) => j.clone(),
        Input::Path(path) => serde_json::from_str(&read(path)?).map_err(|source| CliError::Json {
            path: path.clone(),
            source,
        })?,
    };
    Ok(json.to_ratfunc(tol)?)
}

fn require<'a>(input: &'a Option<Input>, name: &str, cmd: Command) -> CliResult<&'a Input> {
    input
        .as_ref()
        .ok_or_else(|| CliError::Usage(format!("`{}` requires --{name}", cmd_name(cmd))))
}

fn cmd_name(cmd: Command) -> &'static str {
    match cmd {
        Command::Analyze => "analyze",
        Command::Similar => "similar",
        Command::Times => "times",
        Command::Circle => "circle",
        Command::Invert => "invert",
        Command::Matrix => "matrix",
        Command::Oracle => "oracle",
    }
}

/// Loads and validates an element of Rat(D).
fn element(input: &Option<Input>, name: &str, job: &JobSpec, tol: &ToleranceConfig) -> CliResult<RatFunc> {
    let f = load(require(input, name, job.command)?, tol)?;
    f.validate_in_ratd(tol)?;
    Ok(f)
}

/// Runs a job without touching the filesystem except to read inputs.
pub fn run(job: &JobSpec) -> CliResult<JobOutcome> {
    let tol = job.tolerances()?;
    let ctx = PhiContext::new(load(require(&job.phi, "phi", job.command)?, &tol)?, &tol)?;
    if job.format == Format::Csv && job.command != Command::Matrix {
        return Err(CliError::Usage("csv output is only available for `matrix`".into()));
    }
    let r = |name| -> CliResult<RatFunc> {
        let input = match name {
            "r" => &job.r,
            "s" => &job.s,
            _ => &job.t,
        };
        element(input, name, job, &tol)
    };
    let fmt = Fmt {
        pretty: job.pretty,
        text: job.format == Format::Text,
    };
    let (code, body, text) = match job.command {
        Command::Analyze => analyze(&ctx, &r("r")?, fmt)?,
        Command::Similar => similar(&ctx, &r("r")?, &r("s")?, fmt)?,
        Command::Times => {
            let res = ctx.times(&r("r")?, &r("s")?);
            (0, json!({ "result": fmt.func(&res) }), format!("r x s = {res}\n"))
        }
        Command::Circle => {
            let res = ctx.circle(&r("r")?, &r("s")?);
            (0, json!({ "result": fmt.func(&res) }), format!("r o s = {res}\n"))
        }
        Command::Invert => invert(&ctx, &r("t")?, fmt)?,
        Command::Matrix => return matrix(&ctx, &r("r")?, job),
        Command::Oracle => oracle(&ctx, &r("r")?, job)?,
    };
    let report = if fmt.text {
        text
    } else {
        let mut doc = body;
        doc["tolerances"] = serde_json::to_value(tol).expect("tolerances serialize");
        to_json_string(&doc) + "\n"
    };
    Ok(JobOutcome { code, report })
}

fn to_json_string(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("report serializes")
}

#[derive(Debug, Clone, Copy)]
struct Fmt {
    pretty: bool,
    text: bool,
}

impl Fmt {
    fn func(&self, f: &RatFunc) -> Value {
        let mut v = serde_json::to_value(f).expect("function serializes");
        if self.pretty {
            v["display"] = json!(f.to_string());
        }
        v
    }
}

type Rendered = (u8, Value, String);

fn c(z: C64) -> String {
    format!("{:.6}{:+.6}i", z.re, z.im)
}

fn zero_lines(out: &mut String, zeros: &[ZeroDatum]) {
    for z in zeros {
        let _ = writeln!(out, "  {:>28}  mult {}  {:?}", c(z.location), z.multiplicity, z.region);
    }
}

fn analyze(ctx: &PhiContext, r: &RatFunc, fmt: Fmt) -> CliResult<Rendered> {
    let tol = ctx.tol();
    let gp = ctx.gamma_plus(r);
    let gm = ctx.gamma_minus_fn(r)?;
    let plus_zeros = hardy::zeros_in_closed_disc(&hardy::one_minus(&gp), tol)?;
    let phi_zeros = hardy::zeros_in_closed_disc(ctx.phi(), tol)?;
    let one_minus_gm = hardy::one_minus(&gm);
    let local = ctx
        .zeros()
        .iter()
        .map(|z| hardy::ord_at(&one_minus_gm, z.a, z.order, tol))
        .collect::<Result<Vec<_>, _>>()?;
    let body = json!({
        "gamma_plus": fmt.func(&gp),
        "gamma_minus": fmt.func(&gm),
        "zeros_phi": phi_zeros,
        "zeros_one_minus_gamma_plus": plus_zeros,
        "ord_one_minus_gamma_minus": local,
    });
    let mut text = format!("Gamma_+ = {gp}\nGamma_- = {gm}\nzeros of phi in the closed disc:\n");
    zero_lines(&mut text, &phi_zeros);
    text += "zeros of 1 - Gamma_+ in the closed disc:\n";
    zero_lines(&mut text, &plus_zeros);
    text += "order of 1 - Gamma_- at zeros of phi:\n";
    for (z, o) in ctx.zeros().iter().zip(&local) {
        let _ = writeln!(text, "  {:>28}  order {}  ord {}", c(z.a), z.order, o.ord);
    }
    Ok((0, body, text))
}

fn similar(ctx: &PhiContext, r: &RatFunc, s: &RatFunc, fmt: Fmt) -> CliResult<Rendered> {
    let rep: SimilarityReport = ctx.similar(r, s)?;
    let code = if rep.verdict == Verdict::BoundaryAmbiguous { 3 } else { 0 };
    let body = json!({
        "verdict": rep.verdict,
        "cond_a": rep.cond_a,
        "cond_b": rep.cond_b,
        "witness": rep.witness.as_ref().map(|t| fmt.func(t)),
        "residual": rep.residual,
    });
    let mut text = format!("verdict: {}\n", verdict_name(rep.verdict));
    text += "condition (a): zeros of 1 - Gamma_+ in the closed disc\n";
    let _ = writeln!(text, "  {:>28}  {:>6}  {:>6}  status", "location", "mult_r", "mult_s");
    for p in &rep.cond_a {
        let loc = p.r.or(p.s).map(|z| z.location).unwrap_or_default();
        let m = |z: Option<ZeroDatum>| z.map_or("-".to_string(), |z| z.multiplicity.to_string());
        let _ = writeln!(text, "  {:>28}  {:>6}  {:>6}  {:?}", c(loc), m(p.r), m(p.s), p.status);
    }
    text += "condition (b): order of 1 - Gamma_- at zeros of phi\n";
    let _ = writeln!(text, "  {:>28}  {:>5}  {:>5}  {:>5}", "node", "order", "ord_r", "ord_s");
    for t in &rep.cond_b {
        let _ = writeln!(
            text,
            "  {:>28}  {:>5}  {:>5}  {:>5}{}",
            c(t.node),
            t.order,
            t.ord_r,
            t.ord_s,
            if t.holds() { "" } else { "  differs" }
        );
    }
    if let (Some(t), Some(res)) = (&rep.witness, rep.residual) {
        let _ = writeln!(text, "witness t = {t}\nresidual: {res:e}");
    }
    Ok((code, body, text))
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Yes => "YES",
        Verdict::No => "NO",
        Verdict::BoundaryAmbiguous => "BOUNDARY_AMBIGUOUS",
    }
}

fn invert(ctx: &PhiContext, t: &RatFunc, fmt: Fmt) -> CliResult<Rendered> {
    let inv: Invertibility = ctx.is_circle_invertible(t)?;
    if inv.is_boundary_ambiguous() {
        let body = json!({ "invertible": Value::Null, "obstructions": inv.obstructions, "inverse": Value::Null });
        return Ok((3, body, "circle invertibility: BOUNDARY_AMBIGUOUS\n".into()));
    }
    if !inv.invertible {
        let body = json!({ "invertible": false, "obstructions": inv.obstructions, "inverse": Value::Null });
        let mut text = String::from("not circle invertible\n");
        for o in &inv.obstructions {
            let _ = writeln!(text, "  {o:?}");
        }
        return Ok((0, body, text));
    }
    let t_inv = ctx.circle_inverse(t)?;
    let residual = ctx.circle(t, &t_inv).taylor_norm(RESIDUAL_TERMS);
    let body = json!({
        "invertible": true,
        "obstructions": [],
        "inverse": fmt.func(&t_inv),
        "residual": residual,
    });
    let text = format!("inverse = {t_inv}\nresidual: {residual:e}\n");
    Ok((0, body, text))
}

fn matrix(ctx: &PhiContext, r: &RatFunc, job: &JobSpec) -> CliResult<JobOutcome> {
    let n = job.n.unwrap_or(DEFAULT_N);
    let u = operators::truncate_u_r(ctx, r, n)?;
    let k = operators::k_matrix_via_times(ctx, r, n)?;
    let report = match job.format {
        Format::Json => {
            let doc = json!({
                "u_r": u.to_json(),
                "k_r": k.to_json(),
                "tolerances": serde_json::to_value(ctx.tol()).expect("tolerances serialize"),
            });
            to_json_string(&doc) + "\n"
        }
        Format::Csv | Format::Text => {
            let mut buf = Vec::new();
            for (name, op) in [("U_r", &u), ("K_r", &k)] {
                buf.extend_from_slice(format!("# {name}\n").as_bytes());
                op.write_csv(&mut buf)?;
            }
            String::from_utf8(buf).expect("csv is utf-8")
        }
    };
    Ok(JobOutcome { code: 0, report })
}

fn oracle(ctx: &PhiContext, r: &RatFunc, job: &JobSpec) -> CliResult<Rendered> {
    let [re, im] = job
        .w
        .ok_or_else(|| CliError::Usage("`oracle` requires --w".into()))?;
    let w = C64::new(re, im);
    let n = job.n.unwrap_or(DEFAULT_N);
    let kmax = job.k.unwrap_or(1);
    let sides = match job.side {
        Some(s) => vec![s],
        None => vec![Side::Forward, Side::Adjoint],
    };
    let mut rows = Vec::new();
    let mut text = format!("kernel dimensions at w = {}, N = {n}\n", c(w));
    let _ = writeln!(text, "  {:<8} {:>2} {:>9} {:>8}", "side", "k", "numerical", "formula");
    let mut all_agree = true;
    for &side in &sides {
        for k in 1..=kmax {
            let formula = operators::kernel_dim_formula(ctx, r, w, k, side)?;
            let numerical = operators::kernel_dim(ctx, r, w, k, side, n)?;
            all_agree &= formula == numerical;
            rows.push(json!({
                "side": side,
                "k": k,
                "numerical": numerical,
                "formula": formula,
                "agree": formula == numerical,
            }));
            let _ = writeln!(
                text,
                "  {:<8} {:>2} {:>9} {:>8}{}",
                format!("{side:?}").to_lowercase(),
                k,
                numerical,
                formula,
                if formula == numerical { "" } else { "  MISMATCH" }
            );
        }
    }
    let body = json!({ "w": [re, im], "n": n, "rows": rows, "agree": all_agree });
    Ok((0, body, text))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inline(num: &[[f64; 2]], den: &[[f64; 2]]) -> Option<Input> {
        Some(Input::Inline(RatFuncJson {
            num: num.to_vec(),
            den: den.to_vec(),
        }))
    }

    fn job(cmd: Command, phi: Option<Input>, r: Option<Input>, s: Option<Input>) -> JobSpec {
        JobSpec {
            phi,
            r,
            s,
            ..JobSpec::new(cmd)
        }
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn parse_point_forms() {
        assert_eq!(parse_point("0.5,-0.25"), Ok([0.5, -0.25]));
        assert_eq!(parse_point("2"), Ok([2.0, 0.0]));
        assert!(parse_point("1,2,3").is_err());
        assert!(parse_point("x").is_err());
    }

    #[test]
    fn similar_yes_report() {
        let one = inline(&[[1.0, 0.0]], &[[1.0, 0.0]]);
        let half = inline(&[[0.5, 0.0]], &[[1.0, 0.0]]);
        let zero = inline(&[], &[[1.0, 0.0]]);
        let out = run(&job(Command::Similar, one, half, zero)).unwrap();
        assert_eq!(out.code, 0);
        let v: Value = serde_json::from_str(&out.report).unwrap();
        assert_eq!(v["verdict"], "YES");
        let w: RatFuncJson = serde_json::from_value(v["witness"].clone()).unwrap();
        let w = w.to_ratfunc(&ToleranceConfig::default()).unwrap();
        // -0.5 / (1 - 0.5 z)
        let want = RatFunc::from_num_den(
            crate::cpoly::Poly::constant(C64::new(-0.5, 0.0)),
            crate::cpoly::Poly::new(vec![C64::new(1.0, 0.0), C64::new(-0.5, 0.0)]),
            &ToleranceConfig::default(),
        )
        .unwrap();
        assert!(w.residual(&want, 32) < 1e-12);
        assert!(v["tolerances"]["eps_zero"].is_number());
    }

    #[test]
    fn similar_no_report_has_ord_table() {
        let z = inline(&[[0.0, 0.0], [1.0, 0.0]], &[[1.0, 0.0]]);
        let neg = inline(&[[-1.0, 0.0]], &[[1.0, 0.0]]);
        let zero = inline(&[], &[[1.0, 0.0]]);
        let out = run(&job(Command::Similar, z, neg, zero)).unwrap();
        let v: Value = serde_json::from_str(&out.report).unwrap();
        assert_eq!(v["verdict"], "NO");
        assert_eq!(v["cond_b"][0]["order"], 1);
        assert_eq!(v["cond_b"][0]["ord_r"], 1);
        assert_eq!(v["cond_b"][0]["ord_s"], 0);
        assert!(v["witness"].is_null());
    }

    #[test]
    fn validation_errors_map_to_exit_two() {
        let one = inline(&[[1.0, 0.0]], &[[1.0, 0.0]]);
        // 1 / (1 - 2z) has its pole at 0.5
        let bad = inline(&[[1.0, 0.0]], &[[1.0, 0.0], [-2.0, 0.0]]);
        let zero = inline(&[], &[[1.0, 0.0]]);
        let err = run(&job(Command::Similar, one, bad, zero.clone())).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("0.5"));
        let err = run(&job(Command::Times, zero.clone(), zero.clone(), zero)).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn missing_input_is_usage_error() {
        let one = inline(&[[1.0, 0.0]], &[[1.0, 0.0]]);
        let err = run(&job(Command::Times, one, None, None)).unwrap_err();
        assert!(matches!(err, CliError::Usage(_)));
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn reports_are_deterministic() {
        let phi = inline(&[[0.1, 0.2], [1.0, 0.0]], &[[1.0, 0.0], [-0.3, 0.1]]);
        let r = inline(&[[0.3, -0.1], [0.2, 0.0]], &[[1.0, 0.0], [0.4, 0.0]]);
        let mut j = job(Command::Analyze, phi, r, None);
        j.pretty = true;
        let a = run(&j).unwrap().report;
        let b = run(&j).unwrap().report;
        assert_eq!(a, b);
        assert!(a.contains("display"));
    }

    #[test]
    fn tolerance_overrides_apply() {
        let one = inline(&[[1.0, 0.0]], &[[1.0, 0.0]]);
        let mut j = job(Command::Times, one.clone(), one.clone(), one);
        j.tol.insert("sigma_svd".into(), 1e-4);
        let v: Value = serde_json::from_str(&run(&j).unwrap().report).unwrap();
        assert_eq!(v["tolerances"]["sigma_svd"], 1e-4);
        j.tol.insert("bogus".into(), 1.0);
        assert!(run(&j).is_err());
    }

    #[test]
    fn job_spec_round_trips() {
        let mut j = job(Command::Oracle, Some(Input::Path("phi.json".into())), None, None);
        j.w = Some([0.5, 0.0]);
        j.side = Some(Side::Adjoint);
        let text = serde_json::to_string(&j).unwrap();
        let back: JobSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, j);
    }
}
