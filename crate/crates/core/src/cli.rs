//! Command-line front end: argument parsing, the worker pool, JSON envelopes
//! and the line-delimited result cache.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::arith::Integer;
use crate::curve::{Sigma, TwinPrimePair};
use crate::diophantine::{pell_enumerate, pell_fundamental};
use crate::rank::descent::TORSOR_SEARCH_CAP;
use crate::rank::{point_search_par, rank_over_k_with, Region};
use crate::report::stringify_numbers;
use crate::verifier::{verify_theorem1, verify_theorem2, verify_theorem3, verify_theorem4, Status};

#[derive(Debug, Parser)]
#[command(name = "twinec", version, about = "Twin-prime elliptic curves y^2 = x(x+sp)(x+sq)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run all four theorem checks for one pair.
    Analyze(Common),
    /// Run all four theorem checks for every pair with p <= max-p.
    Scan(Common),
    /// Run a single theorem check for one pair or a range.
    Verify {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        theorem: u8,
        #[command(flatten)]
        common: Common,
    },
    /// Fundamental solution and enumeration of x^2 - d y^2 = sigma.
    Pell {
        #[arg(long)]
        d: i64,
        #[command(flatten)]
        common: Common,
    },
    /// Rational points of bounded height on E_sigma.
    SearchPoints {
        /// Only points with x < 0.
        #[arg(long)]
        negative: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Complete 2-descent on both twists and the rank over Q(i).
    Descent(Common),
}

/// Flags shared by every command.
#[derive(Debug, Clone, Args)]
struct Common {
    #[arg(long)]
    p: Option<i64>,
    #[arg(long)]
    max_p: Option<i64>,
    #[arg(long, default_value = "1", allow_negative_numbers = true, value_parser = parse_sigma)]
    sigma: Sigma,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    height_bound: u64,
    #[arg(long, default_value_t = 2000, value_parser = clap::value_parser!(u64).range(1..))]
    xy_bound: u64,
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    y_bound: u64,
    #[arg(long, default_value_t = 9, value_parser = clap::value_parser!(u64).range(1..))]
    multiple_bound: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: u64,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    cache: Option<PathBuf>,
}

fn parse_sigma(s: &str) -> Result<Sigma, String> {
    match s.trim_start_matches('+') {
        "1" => Ok(Sigma::Plus),
        "-1" => Ok(Sigma::Minus),
        _ => Err(format!("sigma must be 1 or -1, got {s}")),
    }
}

/// Snapshot of the options a run used, recorded in every envelope.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theorem: Option<u8>,
    pub p: Option<i64>,
    pub max_p: Option<i64>,
    pub sigma: Sigma,
    pub height_bound: u64,
    pub xy_bound: u64,
    pub y_bound: u64,
    pub multiple_bound: u64,
    pub jobs: u64,
    pub json: bool,
    pub cache_path: Option<String>,
}

impl RunConfig {
    fn new(command: &str, theorem: Option<u8>, c: &Common) -> Self {
        Self {
            command: command.to_string(),
            theorem,
            p: c.p,
            max_p: c.max_p,
            sigma: c.sigma,
            height_bound: c.height_bound,
            xy_bound: c.xy_bound,
            y_bound: c.y_bound,
            multiple_bound: c.multiple_bound,
            jobs: c.jobs,
            json: c.json,
            cache_path: c.cache.as_ref().map(|p| p.display().to_string()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportEnvelope {
    pub version: String,
    pub config: RunConfig,
    pub reports: Vec<Value>,
    pub summary: BTreeMap<String, usize>,
}

impl ReportEnvelope {
    pub fn new(config: RunConfig, mut reports: Vec<Value>) -> Self {
        reports.sort_by_key(sort_key);
        let mut summary: BTreeMap<String, usize> = Status::ALL.iter().map(|s| (s.to_string(), 0)).collect();
        for r in &reports {
            if let Some(s) = r["status"].as_str() {
                *summary.entry(s.to_string()).or_default() += 1;
            }
        }
        Self { version: env!("CARGO_PKG_VERSION").to_string(), config, reports, summary }
    }

    pub fn has_inconsistent(&self) -> bool {
        self.summary.get(Status::Inconsistent.as_str()).copied().unwrap_or(0) > 0
    }

    pub fn to_json(&self) -> Value {
        stringify_numbers(serde_json::to_value(self).expect("envelope serializes"))
    }
}

fn field_u64(v: &Value, key: &str) -> u64 {
    match &v[key] {
        Value::String(s) => s.parse().unwrap_or(0),
        Value::Number(n) => n.as_u64().unwrap_or(0),
        _ => 0,
    }
}

fn sort_key(v: &Value) -> (u64, u64, String) {
    (field_u64(v, "p"), field_u64(v, "theorem"), v["sub_case"].as_str().unwrap_or("").to_string())
}

/// One unit of work: a theorem check for a pair, with the sign where it
/// matters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Job {
    pub pair: TwinPrimePair,
    pub theorem: u8,
    pub sigma: Option<Sigma>,
}

#[derive(Debug, Clone, Copy)]
pub struct Bounds {
    pub height_bound: u64,
    pub xy_bound: u64,
    pub y_bound: u64,
    pub multiple_bound: u64,
}

impl Bounds {
    fn from_common(c: &Common) -> Self {
        Self { height_bound: c.height_bound, xy_bound: c.xy_bound, y_bound: c.y_bound, multiple_bound: c.multiple_bound }
    }
}

impl Job {
    /// The bounds the report for this job records.
    pub fn requested_bounds(&self, b: &Bounds) -> BTreeMap<String, u64> {
        let cap = TORSOR_SEARCH_CAP as u64;
        let entries: Vec<(&str, u64)> = match self.theorem {
            1 => vec![("height_bound", b.height_bound), ("torsor_search_cap", cap)],
            2 => vec![("xy_bound", b.xy_bound)],
            3 => vec![
                ("height_bound", b.height_bound),
                ("multiple_bound", b.multiple_bound),
                ("torsor_search_cap", cap),
                ("xy_bound", b.xy_bound),
            ],
            _ => vec![("y_bound", b.y_bound)],
        };
        entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    pub fn run(&self, b: &Bounds) -> Value {
        let sigma = self.sigma.unwrap_or(Sigma::Plus);
        let report = match self.theorem {
            1 => verify_theorem1(self.pair, sigma, b.height_bound),
            2 => verify_theorem2(self.pair, b.xy_bound),
            3 => verify_theorem3(self.pair, b.height_bound, b.multiple_bound, b.xy_bound),
            _ => verify_theorem4(self.pair, sigma, b.y_bound),
        };
        report.to_json()
    }

    fn matches(&self, report: &Value, b: &Bounds) -> bool {
        let sigma = self.sigma.map(|s| Value::String(s.to_string())).unwrap_or(Value::Null);
        if field_u64(report, "p") != self.pair.p() as u64
            || field_u64(report, "theorem") != self.theorem as u64
            || report.get("sigma").cloned().unwrap_or(Value::Null) != sigma
        {
            return false;
        }
        let cached = &report["bounds"];
        self.requested_bounds(b).iter().all(|(k, &v)| cached.get(k).is_some() && field_u64(cached, k) >= v)
    }
}

/// The checks `analyze` and `scan` run for one pair.
pub fn jobs_for_pair(pair: TwinPrimePair, sigma: Sigma) -> Vec<Job> {
    vec![
        Job { pair, theorem: 1, sigma: Some(sigma) },
        Job { pair, theorem: 2, sigma: None },
        Job { pair, theorem: 3, sigma: None },
        Job { pair, theorem: 4, sigma: Some(Sigma::Plus) },
        Job { pair, theorem: 4, sigma: Some(Sigma::Minus) },
    ]
}

/// Append-only line-delimited store of report JSON.
pub struct Cache {
    path: PathBuf,
    entries: Vec<Value>,
}

impl Cache {
    /// Loads every parseable line; unreadable lines are skipped with a
    /// warning on `warn`.
    pub fn load(path: &Path, warn: &mut dyn Write) -> io::Result<Self> {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => String::new(),
            Err(e) => return Err(e),
        };
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<Value>(line) {
                Ok(v) if v.is_object() => entries.push(v),
                _ => writeln!(warn, "warning: skipping corrupt cache record at {}:{}", path.display(), i + 1)?,
            }
        }
        Ok(Self { path: path.to_path_buf(), entries })
    }

    /// Latest stored report that answers `job` at bounds at least `b`.
    pub fn lookup(&self, job: &Job, b: &Bounds) -> Option<&Value> {
        self.entries.iter().rev().find(|r| job.matches(r, b))
    }

    pub fn store(&mut self, reports: &[Value]) -> io::Result<()> {
        if reports.is_empty() {
            return Ok(());
        }
        let needs_newline = fs::read(&self.path).map(|b| !b.is_empty() && b.last() != Some(&b'\n')).unwrap_or(false);
        let mut f = OpenOptions::new().create(true).append(true).open(&self.path)?;
        let mut buf = String::new();
        if needs_newline {
            buf.push('\n');
        }
        for r in reports {
            buf.push_str(&serde_json::to_string(r).expect("json"));
            buf.push('\n');
        }
        f.write_all(buf.as_bytes())?;
        self.entries.extend(reports.iter().cloned());
        Ok(())
    }
}

#[derive(Debug)]
struct UsageError(String);

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

fn require_pair(c: &Common) -> Result<TwinPrimePair, UsageError> {
    let p = c.p.ok_or_else(|| usage("--p is required"))?;
    TwinPrimePair::new(p).map_err(|e| usage(e.to_string()))
}

fn pairs_for(c: &Common, allow_single: bool) -> Result<Vec<TwinPrimePair>, UsageError> {
    match (c.p, c.max_p) {
        (Some(_), Some(_)) => Err(usage("give exactly one of --p and --max-p")),
        (Some(_), None) if allow_single => Ok(vec![require_pair(c)?]),
        (None, Some(m)) => Ok(TwinPrimePair::up_to(m)),
        _ if allow_single => Err(usage("one of --p and --max-p is required")),
        _ => Err(usage("--max-p is required")),
    }
}

fn pool(jobs: u64) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(jobs as usize).build().expect("thread pool")
}

fn run_jobs(jobs: &[Job], c: &Common, err: &mut dyn Write) -> io::Result<Vec<Value>> {
    let bounds = Bounds::from_common(c);
    let mut cache = match &c.cache {
        Some(path) => Some(Cache::load(path, err)?),
        None => None,
    };
    let cached: Vec<Option<Value>> =
        jobs.iter().map(|j| cache.as_ref().and_then(|cache| cache.lookup(j, &bounds).cloned())).collect();
    let fresh: Vec<Option<Value>> = pool(c.jobs).install(|| {
        jobs.par_iter().zip(&cached).map(|(j, hit)| hit.is_none().then(|| j.run(&bounds))).collect()
    });
    if let Some(cache) = cache.as_mut() {
        let new: Vec<Value> = fresh.iter().flatten().cloned().collect();
        cache.store(&new)?;
    }
    Ok(cached.into_iter().zip(fresh).map(|(a, b)| a.or(b).expect("computed or cached")).collect())
}

fn print_envelope(env: &ReportEnvelope, json: bool, out: &mut dyn Write) -> io::Result<()> {
    if json {
        writeln!(out, "{}", serde_json::to_string_pretty(&env.to_json()).expect("json"))?;
        return Ok(());
    }
    writeln!(out, "{:>6} {:>6}  {:<3} {:<26} status", "p", "q", "thm", "sub_case")?;
    for r in &env.reports {
        writeln!(
            out,
            "{:>6} {:>6}  {:<3} {:<26} {}",
            r["p"].as_str().unwrap_or(""),
            r["q"].as_str().unwrap_or(""),
            r["theorem"].as_str().unwrap_or(""),
            r["sub_case"].as_str().unwrap_or(""),
            r["status"].as_str().unwrap_or("")
        )?;
    }
    let summary: Vec<String> = env.summary.iter().map(|(k, v)| format!("{k}={v}")).collect();
    writeln!(out, "summary: {}", summary.join(" "))
}

fn print_value(v: &Value, out: &mut dyn Write) -> io::Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(&stringify_numbers(v.clone())).expect("json"))
}

fn cmd_reports(config: RunConfig, jobs: Vec<Job>, c: &Common, out: &mut dyn Write, err: &mut dyn Write) -> io::Result<i32> {
    let reports = run_jobs(&jobs, c, err)?;
    let env = ReportEnvelope::new(config, reports);
    print_envelope(&env, c.json, out)?;
    Ok(if env.has_inconsistent() { 2 } else { 0 })
}

fn cmd_pell(d: i64, c: &Common, out: &mut dyn Write) -> Result<i32, UsageError> {
    let fundamental = pell_fundamental(d, c.sigma).map_err(|e| usage(e.to_string()))?;
    let all = pell_enumerate(d, c.sigma, &Integer::from(c.y_bound)).map_err(|e| usage(e.to_string()))?;
    let io = |e: io::Error| usage(e.to_string());
    if c.json {
        let v = json!({"d": d, "sigma": c.sigma, "y_bound": c.y_bound, "fundamental": fundamental, "solutions": all});
        print_value(&v, out).map_err(io)?;
        return Ok(0);
    }
    writeln!(out, "x^2 - {d} y^2 = {}", c.sigma.value()).map_err(io)?;
    match fundamental {
        None => writeln!(out, "no solution (even period)").map_err(io)?,
        Some(f) => {
            writeln!(out, "fundamental: ({}, {})", f.x, f.y).map_err(io)?;
            for s in &all {
                writeln!(out, "({}, {})", s.x, s.y).map_err(io)?;
            }
        }
    }
    Ok(0)
}

fn cmd_search_points(negative: bool, c: &Common, out: &mut dyn Write) -> Result<i32, UsageError> {
    let pair = require_pair(c)?;
    let curve = crate::curve::Curve::from_pair(pair, c.sigma);
    let region = if negative { Region::NegativeX } else { Region::All };
    let found = pool(c.jobs).install(|| point_search_par(&curve, c.height_bound, region));
    let io = |e: io::Error| usage(e.to_string());
    if c.json {
        let pts: Vec<Value> = found
            .iter()
            .map(|f| json!({"point": f.point, "height": f.height.to_string(), "torsion": f.torsion}))
            .collect();
        let v = json!({"curve": curve, "height_bound": c.height_bound, "points": pts});
        print_value(&v, out).map_err(io)?;
    } else {
        writeln!(out, "{} points of height <= {} on E_{}", found.len(), c.height_bound, c.sigma).map_err(io)?;
        for f in &found {
            let tag = if f.torsion { "torsion" } else { "" };
            writeln!(out, "{:>12}  {} {tag}", f.height.to_string(), f.point).map_err(io)?;
        }
    }
    Ok(0)
}

fn cmd_descent(c: &Common, out: &mut dyn Write) -> Result<i32, UsageError> {
    let pair = require_pair(c)?;
    let report = pool(c.jobs).install(|| rank_over_k_with(pair, c.sigma, c.height_bound, TORSOR_SEARCH_CAP));
    let io = |e: io::Error| usage(e.to_string());
    if c.json {
        print_value(&serde_json::to_value(&report).expect("json"), out).map_err(io)?;
        return Ok(0);
    }
    for d in [&report.rank_plus_q, &report.rank_minus_q] {
        let gens: Vec<String> = d.generators_found.iter().map(|g| g.to_string()).collect();
        writeln!(
            out,
            "E_{}: rank in [{}, {}], surviving pairs {}, selmer-only {}, generators [{}]",
            d.curve.sigma,
            d.rank_lower,
            d.rank_upper,
            d.surviving_pairs.len(),
            d.selmer_only.len(),
            gens.join(", ")
        )
        .map_err(io)?;
    }
    let rk = report.rank_k;
    match rk.exact() {
        Some(r) => writeln!(out, "rank E(K) = {r}"),
        None => writeln!(out, "rank E(K) in [{}, {}]", rk.lower(), rk.upper()),
    }
    .map_err(io)?;
    Ok(0)
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, UsageError> {
    let io = |e: io::Error| usage(e.to_string());
    match cli.command {
        Command::Analyze(c) => {
            let pair = require_pair(&c)?;
            if c.max_p.is_some() {
                return Err(usage("analyze takes --p only"));
            }
            let config = RunConfig::new("analyze", None, &c);
            cmd_reports(config, jobs_for_pair(pair, c.sigma), &c, out, err).map_err(io)
        }
        Command::Scan(c) => {
            let pairs = pairs_for(&c, false)?;
            let config = RunConfig::new("scan", None, &c);
            let jobs = pairs.into_iter().flat_map(|p| jobs_for_pair(p, c.sigma)).collect();
            cmd_reports(config, jobs, &c, out, err).map_err(io)
        }
        Command::Verify { theorem, common: c } => {
            let pairs = pairs_for(&c, true)?;
            let config = RunConfig::new("verify", Some(theorem), &c);
            let sigma = matches!(theorem, 1 | 4).then_some(c.sigma);
            let jobs = pairs.into_iter().map(|pair| Job { pair, theorem, sigma }).collect();
            cmd_reports(config, jobs, &c, out, err).map_err(io)
        }
        Command::Pell { d, common: c } => cmd_pell(d, &c, out),
        Command::SearchPoints { negative, common: c } => cmd_search_points(negative, &c, out),
        Command::Descent(c) => cmd_descent(&c, out),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code: 0 on success, 1 on usage or input errors, 2 when a
/// report is inconsistent.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match dispatch(cli, out, err) {
        Ok(code) => code,
        Err(UsageError(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn requested_bounds_match_reports() {
        let b = Bounds { height_bound: 50, xy_bound: 40, y_bound: 1000, multiple_bound: 3 };
        let pair = TwinPrimePair::new(5).unwrap();
        for job in jobs_for_pair(pair, Sigma::Plus) {
            let report = job.run(&b);
            let recorded: BTreeMap<String, u64> = report["bounds"]
                .as_object()
                .unwrap()
                .iter()
                .map(|(k, v)| (k.clone(), v.as_str().unwrap().parse().unwrap()))
                .collect();
            assert_eq!(recorded, job.requested_bounds(&b), "theorem {}", job.theorem);
            assert!(job.matches(&report, &b));
        }
    }

    #[test]
    fn inconsistent_report_sets_flag() {
        let c = Cli::try_parse_from(["twinec", "analyze", "--p", "3"]).unwrap();
        let Command::Analyze(common) = c.command else { unreachable!() };
        let config = RunConfig::new("analyze", None, &common);
        let ok = json!({"p": "5", "theorem": "2", "sub_case": "x", "status": "verified-at-bound"});
        let bad = json!({"p": "3", "theorem": "2", "sub_case": "x", "status": "inconsistent"});
        let env = ReportEnvelope::new(config.clone(), vec![ok.clone()]);
        assert!(!env.has_inconsistent());
        let env = ReportEnvelope::new(config, vec![ok, bad]);
        assert!(env.has_inconsistent());
        assert_eq!(env.reports[0]["p"], "3");
        assert_eq!(env.summary["inconsistent"], 1);
    }

    #[test]
    fn sigma_parsing() {
        assert_eq!(parse_sigma("1"), Ok(Sigma::Plus));
        assert_eq!(parse_sigma("+1"), Ok(Sigma::Plus));
        assert_eq!(parse_sigma("-1"), Ok(Sigma::Minus));
        assert!(parse_sigma("2").is_err());
    }
}
