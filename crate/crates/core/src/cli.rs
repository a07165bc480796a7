//! Command-line front end: strategy runs, benchmarks, design tools and the exact solver.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value as Json};

use crate::colorset::ColorSet;
use crate::design::{
    build_counterexample_thm3v, build_design_random56, build_design_thm3ii, check_thm4_bounds, codegree_stats,
    decode_thm3ii, Design,
};
use crate::error::{Error, Result};
use crate::explore::{explore, RandomChooser};
use crate::model::{AnswerModel, Coloring};
use crate::oracle::{
    assignment_from_json, legal_set, BallOracle, BranchingOracle, ChoiceOracle, LazyOracle, LazyPolicy,
    NamedOracle, NamedSpec, Session,
};
use crate::search::{
    alpha_query_bound, alpha_reduce, even_design, find_nonminority_adaptive_3, find_nonminority_adaptive_even,
    find_nonminority_adaptive_odd, nonadaptive_even_decode, two_different_balls, A3_LINEAR_K, ALPHA_SLACK,
    ODD_L2_QUADRATIC,
};
use crate::selection::{
    check_sel2, check_sel3, mom2_bound, mom2_select, mom3_bound, mom3_select, BinaryOracle, PairSession, SelectConfig,
    TotalOracle,
};
use crate::solver::{design_determines, exact_adaptive_complexity, solver_budget, witness_assignment, Goal, Value};

#[derive(Parser, Debug)]
#[command(name = "majsearch", version, about = "Find a non-minority ball using majority queries")]
pub struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run one strategy against an oracle and verify its output.
    Run(RunArgs),
    /// Seeded query-count table over a range of sizes.
    Bench(BenchArgs),
    /// Build, inspect, decode or decide non-adaptive designs.
    #[command(subcommand)]
    Design(DesignCmd),
    /// Exact adaptive query complexity by minimax search.
    Exact(ExactArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// 2db, a3, odd, even or alpha-reduce
    strategy: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    /// The ratio parameter A for alpha-reduce (query size A+1)
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// fixed:<RB-string|mono|random>, lazy, or named:<kind>?k=v&...
    #[arg(long, default_value = "fixed:random")]
    oracle: String,
    /// majority, nonminority or alpha:num/den
    #[arg(long)]
    model: Option<String>,
    /// Transcript JSON (single run) or summary JSON (exhaustive run)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Enumerate every adversary answer sequence
    #[arg(long)]
    exhaustive: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// mom2, mom3, 2db, a3, odd, even, even-design or alpha-reduce
    strategy: String,
    /// A size, a list "a,b,c", or a decade range "a..b"
    #[arg(long)]
    n: String,
    #[arg(long)]
    q: Option<usize>,
    /// Selection rank (mom2, mom3) or ratio parameter A (alpha-reduce)
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum DesignCmd {
    /// Write a design file: complete, thm3ii, random56, thm3v or even.
    Build {
        kind: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Size, minimum degree and minimum co-degree as JSON.
    Stats { file: PathBuf },
    /// Counting bounds report for a triple design.
    Bounds {
        file: PathBuf,
        #[arg(long)]
        claims_determining: bool,
    },
    /// Decode an answer table (JSON assignment) for a design file.
    Decode {
        file: PathBuf,
        #[arg(long)]
        answers: PathBuf,
    },
    /// Decide whether a design determines a non-minority ball.
    Determine {
        /// A design file or a construction name
        target: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        q: Option<usize>,
        #[arg(long, default_value = "majority")]
        model: String,
        /// Where to write the defeating answer table, if any
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct ExactArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    q: usize,
    #[arg(long, default_value = "majority")]
    model: String,
    /// nonminority or fraction:A
    #[arg(long, default_value = "nonminority")]
    goal: String,
}

/// Parses `args` and runs the command. Returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("majsearch: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Run(a) => cmd_run(a),
        Cmd::Bench(a) => cmd_bench(a),
        Cmd::Design(d) => cmd_design(d),
        Cmd::Exact(a) => cmd_exact(a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut o = std::io::stdout().lock();
            o.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                o.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn read(p: &Path) -> Result<String> {
    std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Strategy {
    TwoDb,
    A3,
    Odd,
    Even,
    AlphaReduce,
}

impl Strategy {
    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "2db" => Strategy::TwoDb,
            "a3" => Strategy::A3,
            "odd" => Strategy::Odd,
            "even" => Strategy::Even,
            "alpha-reduce" => Strategy::AlphaReduce,
            _ => return Err(Error::Usage(format!("unknown strategy {s:?}"))),
        })
    }

    fn default_q(self, a: usize) -> usize {
        match self {
            Strategy::TwoDb | Strategy::A3 => 3,
            Strategy::Odd => 5,
            Strategy::Even => 4,
            Strategy::AlphaReduce => a + 1,
        }
    }

    fn check_q(self, q: usize, a: usize) -> Result<()> {
        let ok = match self {
            Strategy::TwoDb | Strategy::A3 => q == 3,
            Strategy::Odd => q >= 3 && q % 2 == 1,
            Strategy::Even => q >= 2 && q % 2 == 0,
            Strategy::AlphaReduce => q == a + 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Usage(format!("query size {q} does not suit this strategy")))
        }
    }

    fn default_model(self, a: usize) -> AnswerModel {
        match self {
            Strategy::AlphaReduce => AnswerModel::Alpha { num: 1, den: a as u32 },
            _ => AnswerModel::Majority,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
enum Outcome {
    Ball(usize),
    Pair(usize, usize),
}

fn execute<O: BallOracle>(st: Strategy, sess: &mut Session<O>, a: usize) -> Result<Outcome> {
    let cfg = SelectConfig::MOM3_DEFAULT;
    Ok(match st {
        Strategy::TwoDb => {
            let all: Vec<usize> = (0..sess.n()).collect();
            let (x, y) = two_different_balls(sess, &all)?;
            Outcome::Pair(x, y)
        }
        Strategy::A3 => Outcome::Ball(find_nonminority_adaptive_3(sess, cfg)?),
        Strategy::Odd => {
            let l = (sess.q() - 1) / 2;
            Outcome::Ball(find_nonminority_adaptive_odd(sess, l, cfg)?)
        }
        Strategy::Even => {
            let l = sess.q() / 2;
            Outcome::Ball(find_nonminority_adaptive_even(sess, l)?)
        }
        Strategy::AlphaReduce => Outcome::Ball(alpha_reduce(sess, a)?),
    })
}

/// Checks the outcome against one coloring. For alpha-reduce, returns the realized slack.
fn judge(st: Strategy, out: Outcome, c: &Coloring, a: usize) -> std::result::Result<Option<usize>, String> {
    let n = c.n();
    let blue = c.count_blue();
    let same = |b: usize| if c.color(b) == 1 { blue } else { n - blue };
    match (st, out) {
        (Strategy::TwoDb, Outcome::Pair(x, y)) => {
            if c.color(x) != c.color(y) || c.is_monochromatic() {
                Ok(None)
            } else {
                Err(format!("balls {x} and {y} share a color in a two-colored set"))
            }
        }
        (Strategy::AlphaReduce, Outcome::Ball(b)) => {
            let need = (n - 1).div_ceil(a);
            let slack = need.saturating_sub(same(b) - 1);
            if slack <= ALPHA_SLACK {
                Ok(Some(slack))
            } else {
                Err(format!("ball {b} has {} same-colored others, below {need} - {ALPHA_SLACK}", same(b) - 1))
            }
        }
        (_, Outcome::Ball(b)) => {
            if 2 * same(b) >= n {
                Ok(None)
            } else {
                Err(format!("ball {b} is a minority ball"))
            }
        }
        _ => Err("strategy returned an unexpected shape".into()),
    }
}

/// Judges against every coloring of `set`; returns the worst slack.
fn judge_all(st: Strategy, out: Outcome, set: &ColorSet, a: usize) -> std::result::Result<Option<usize>, String> {
    let mut worst = None;
    for m in set.iter() {
        let c = Coloring::from_mask(set.n(), m).map_err(|e| e.to_string())?;
        if let Some(s) = judge(st, out, &c, a)? {
            worst = worst.max(Some(s));
        }
    }
    Ok(worst)
}

enum OracleSpec {
    Fixed(Coloring),
    Lazy,
    Named(NamedSpec),
}

fn parse_oracle(s: &str, n: Option<usize>, q: usize, rng_seed: u64) -> Result<OracleSpec> {
    if s == "lazy" {
        return Ok(OracleSpec::Lazy);
    }
    if let Some(rest) = s.strip_prefix("fixed:") {
        let c = match rest {
            "mono" => Coloring::monochromatic(need_n(n)?, 0)?,
            "random" => {
                let n = need_n(n)?;
                let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
                random_coloring(&mut rng, n)?
            }
            _ => Coloring::parse(rest).map_err(|e| Error::Usage(e.to_string()))?,
        };
        if let Some(n) = n {
            if n != c.n() {
                return Err(Error::Usage(format!("--n {n} disagrees with a coloring of {} balls", c.n())));
            }
        }
        return Ok(OracleSpec::Fixed(c));
    }
    if let Some(rest) = s.strip_prefix("named:") {
        let (kind, query) = rest.split_once('?').unwrap_or((rest, ""));
        let mut params = serde_json::Map::new();
        for kv in query.split('&').filter(|t| !t.is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(|| Error::Usage(format!("bad oracle parameter {kv:?}")))?;
            let v: u64 = v.parse().map_err(|_| Error::Usage(format!("parameter {k} needs an integer, got {v:?}")))?;
            params.insert(k.to_string(), json!(v));
        }
        if let Some(n) = n {
            params.entry("n").or_insert(json!(n));
        }
        if matches!(kind, "lemma15" | "prop17") {
            params.entry("q").or_insert(json!(q));
        }
        let doc = json!({ "kind": kind, "params": params });
        let spec = NamedSpec::from_json(&doc.to_string()).map_err(|e| Error::Usage(e.to_string()))?;
        return Ok(OracleSpec::Named(spec));
    }
    Err(Error::Usage(format!("unknown oracle {s:?}")))
}

fn need_n(n: Option<usize>) -> Result<usize> {
    n.ok_or_else(|| Error::Usage("--n is required for this oracle".into()))
}

/// Each ball is blue with a probability drawn once per coloring.
fn random_coloring(rng: &mut ChaCha8Rng, n: usize) -> Result<Coloring> {
    let p: f64 = rng.gen();
    let colors: Vec<u8> = (0..n).map(|_| u8::from(rng.gen::<f64>() < p)).collect();
    Coloring::from_colors(&colors)
}

fn cmd_run(a: RunArgs) -> Result<i32> {
    let st = Strategy::parse(&a.strategy)?;
    let ratio = a.k.unwrap_or(2);
    let q = a.q.unwrap_or(st.default_q(ratio));
    st.check_q(q, ratio)?;
    let model = match &a.model {
        Some(m) => AnswerModel::parse(m)?,
        None => st.default_model(ratio),
    };
    let spec = parse_oracle(&a.oracle, a.n, q, a.seed)?;
    let mut summary = json!({
        "strategy": a.strategy,
        "oracle": a.oracle,
        "q": q,
        "model": model.name(),
    });
    let verdict = if a.exhaustive {
        run_exhaustive(st, &spec, a.n, q, model, ratio, &mut summary)?
    } else {
        run_once(st, spec, a.n, q, model, ratio, a.seed, &mut summary, a.out.as_deref())?
    };
    if a.exhaustive {
        emit(a.out.as_deref(), &summary.to_string())?;
    } else {
        emit(None, &summary.to_string())?;
    }
    match verdict {
        Ok(()) => Ok(0),
        Err(msg) => {
            eprintln!("majsearch: contract violation: {msg}");
            Ok(1)
        }
    }
}

type Verdict = std::result::Result<(), String>;

#[allow(clippy::too_many_arguments)]
fn run_once(
    st: Strategy,
    spec: OracleSpec,
    n: Option<usize>,
    q: usize,
    model: AnswerModel,
    ratio: usize,
    seed: u64,
    summary: &mut Json,
    out: Option<&Path>,
) -> Result<Verdict> {
    let (outcome, transcript, verdict) = match spec {
        OracleSpec::Fixed(c) => {
            let oracle = ChoiceOracle::new(c.clone(), q, model, RandomChooser::new(seed))?;
            let mut sess = Session::new(oracle);
            let o = execute(st, &mut sess, ratio)?;
            let v = judge(st, o, &c, ratio);
            (o, sess.transcript().clone(), v)
        }
        OracleSpec::Lazy => {
            let oracle = LazyOracle::new(need_n(n)?, q, model, LazyPolicy::MaxSurvivors)?;
            let mut sess = Session::new(oracle);
            let o = execute(st, &mut sess, ratio)?;
            let v = judge_all(st, o, sess.oracle().consistent(), ratio);
            (o, sess.transcript().clone(), v)
        }
        OracleSpec::Named(spec) => {
            let oracle = NamedOracle::build(spec)?;
            if oracle.q() != q || oracle.model() != model {
                return Err(Error::Usage(format!(
                    "named oracle answers {}-sets under {}, the run needs {q}-sets under {}",
                    oracle.q(),
                    oracle.model().name(),
                    model.name()
                )));
            }
            let mut sess = Session::new(oracle);
            let o = execute(st, &mut sess, ratio)?;
            let legal = legal_set(sess.n(), sess.transcript().entries(), model)?;
            let v = judge_all(st, o, &legal, ratio);
            (o, sess.transcript().clone(), v)
        }
    };
    summary["n"] = json!(transcript.n);
    summary["result"] = json!(outcome);
    summary["queries"] = json!(transcript.distinct_count());
    summary["verified"] = json!(verdict.is_ok());
    if let Ok(Some(slack)) = verdict {
        summary["slack"] = json!(slack);
    }
    if let Some(p) = out {
        std::fs::write(p, transcript.to_json())?;
    }
    Ok(verdict.map(|_| ()))
}

fn run_exhaustive(
    st: Strategy,
    spec: &OracleSpec,
    n: Option<usize>,
    q: usize,
    model: AnswerModel,
    ratio: usize,
    summary: &mut Json,
) -> Result<Verdict> {
    let limit = solver_budget()?;
    let mut max_q = 0usize;
    let mut worst_slack: Option<usize> = None;
    let mut failure: Option<String> = None;
    let (n, leaves) = match spec {
        OracleSpec::Fixed(c) => {
            let leaves = explore(limit, |ex| {
                let mut sess = Session::new(ChoiceOracle::new(c.clone(), q, model, ex)?);
                let o = execute(st, &mut sess, ratio)?;
                max_q = max_q.max(sess.distinct());
                match judge(st, o, c, ratio) {
                    Ok(s) => worst_slack = worst_slack.max(s),
                    Err(e) => failure = failure.take().or(Some(format!("{e} after {:?}", sess.transcript().entries()))),
                }
                Ok(())
            })?;
            (c.n(), leaves)
        }
        OracleSpec::Lazy => {
            let n = need_n(n)?;
            let leaves = explore(limit, |ex| {
                let mut sess = Session::new(BranchingOracle::new(n, q, model, ex)?);
                let o = execute(st, &mut sess, ratio)?;
                max_q = max_q.max(sess.distinct());
                match judge_all(st, o, sess.oracle().consistent(), ratio) {
                    Ok(s) => worst_slack = worst_slack.max(s),
                    Err(e) => failure = failure.take().or(Some(format!("{e} after {:?}", sess.transcript().entries()))),
                }
                Ok(())
            })?;
            (n, leaves)
        }
        OracleSpec::Named(_) => return Err(Error::Usage("named oracles are deterministic; drop --exhaustive".into())),
    };
    summary["n"] = json!(n);
    summary["leaves"] = json!(leaves);
    summary["max_queries"] = json!(max_q);
    summary["verified"] = json!(failure.is_none());
    if let Some(s) = worst_slack {
        summary["slack"] = json!(s);
    }
    Ok(match failure {
        None => Ok(()),
        Some(f) => Err(f),
    })
}

/// Sizes from "a", "a,b,c" or "a..b" (a, 10a, 100a, ... up to b, plus b).
fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| Error::Usage(format!("bad size {t:?}")));
    if let Some((lo, hi)) = s.split_once("..") {
        let (lo, hi) = (num(lo)?, num(hi)?);
        if lo == 0 || lo > hi {
            return Err(Error::Usage(format!("bad size range {s:?}")));
        }
        let mut v = Vec::new();
        let mut x = lo;
        while x < hi {
            v.push(x);
            x = x.saturating_mul(10);
        }
        v.push(hi);
        return Ok(v);
    }
    s.split(',').map(num).collect()
}

#[derive(Serialize)]
struct BenchRow {
    strategy: String,
    n: usize,
    trials: usize,
    max: usize,
    mean: f64,
    bound: Option<usize>,
    failures: usize,
    pass: bool,
}

/// The random stream of one trial: ChaCha8 keyed by the seed, with stream id (n << 20) | trial.
fn trial_rng(seed: u64, n: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 20) | trial as u64);
    rng
}

fn cmd_bench(a: BenchArgs) -> Result<i32> {
    let sizes = parse_sizes(&a.n)?;
    if a.trials == 0 || a.trials >= 1 << 20 {
        return Err(Error::Usage("--trials must lie in 1..2^20".into()));
    }
    let mut rows = Vec::new();
    for &n in &sizes {
        let counts: Vec<Result<(usize, bool)>> =
            (0..a.trials).into_par_iter().map(|t| bench_trial(&a, n, trial_rng(a.seed, n, t))).collect();
        let mut got = Vec::with_capacity(counts.len());
        for c in counts {
            got.push(c?);
        }
        let max = got.iter().map(|g| g.0).max().unwrap_or(0);
        let min = got.iter().map(|g| g.0).min().unwrap_or(0);
        let failures = got.iter().filter(|g| !g.1).count();
        let mean = got.iter().map(|g| g.0 as f64).sum::<f64>() / got.len() as f64;
        let bound = bench_bound(&a, n)?;
        let within = match bound {
            Some(b) if a.strategy == "2db" => min == b && max == b,
            Some(b) => max <= b,
            None => true,
        };
        rows.push(BenchRow { strategy: a.strategy.clone(), n, trials: a.trials, max, mean, bound, failures, pass: within && failures == 0 });
    }
    let text = match a.format {
        Format::Json => serde_json::to_string_pretty(&rows).expect("rows serialize"),
        Format::Csv => {
            let mut s = String::from("strategy,n,trials,max,mean,bound,failures,pass\n");
            for r in &rows {
                let bound = r.bound.map(|b| b.to_string()).unwrap_or_default();
                s += &format!("{},{},{},{},{:.3},{},{},{}\n", r.strategy, r.n, r.trials, r.max, r.mean, bound, r.failures, r.pass);
            }
            s
        }
    };
    emit(a.out.as_deref(), &text)?;
    Ok(if rows.iter().all(|r| r.pass) { 0 } else { 1 })
}

fn bench_bound(a: &BenchArgs, n: usize) -> Result<Option<usize>> {
    Ok(match a.strategy.as_str() {
        "mom2" => Some(mom2_bound(n)),
        "mom3" => Some(mom3_bound(n)),
        "2db" => Some(n.saturating_sub(2)),
        "a3" => Some(A3_LINEAR_K * n),
        "even" => Some(n - a.q.unwrap_or(4) + 1),
        "even-design" => Some(n * (n - a.q.unwrap_or(4))),
        "odd" if a.q.unwrap_or(5) == 5 => Some(ODD_L2_QUADRATIC.0 * n * n / ODD_L2_QUADRATIC.1),
        "odd" => None,
        "alpha-reduce" => Some(alpha_query_bound(n, a.k.unwrap_or(2))),
        s => return Err(Error::Usage(format!("unknown bench strategy {s:?}"))),
    })
}

/// One trial: (query count, postcondition held).
fn bench_trial(a: &BenchArgs, n: usize, mut rng: ChaCha8Rng) -> Result<(usize, bool)> {
    match a.strategy.as_str() {
        "mom2" => {
            let vals: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=(n as i64 / 4 + 1))).collect();
            let k = a.k.unwrap_or_else(|| rng.gen_range(1..=n));
            let elems: Vec<usize> = (0..n).collect();
            let mut sess = PairSession::new(TotalOracle::new(vals.clone(), RandomChooser::new(rng.gen())));
            let out = mom2_select(&mut sess, &elems, k, SelectConfig::MOM2_DEFAULT)?;
            Ok((sess.distinct(), check_sel2(&vals, &elems, k, &out).is_ok()))
        }
        "mom3" => {
            if n < 2 {
                return Err(Error::Usage("mom3 needs n >= 2".into()));
            }
            let p: f64 = rng.gen();
            let mut vals = vec![0u8, 1];
            vals.extend((2..n).map(|_| u8::from(rng.gen::<f64>() < p)));
            let k = a.k.unwrap_or_else(|| rng.gen_range(1..=n));
            let elems: Vec<usize> = (0..n).collect();
            let mut sess = PairSession::new(BinaryOracle::new(vals.clone(), RandomChooser::new(rng.gen()))?);
            let out = mom3_select(&mut sess, &elems, 0, 1, k, SelectConfig::MOM3_DEFAULT)?;
            Ok((sess.distinct(), check_sel3(&vals, &elems, 0, 1, k, &out).is_ok()))
        }
        "even-design" => {
            let l = a.q.unwrap_or(4) / 2;
            let c = random_coloring(&mut rng, n)?;
            let design = even_design(n, l)?;
            let mut oracle = ChoiceOracle::new(c.clone(), 2 * l, AnswerModel::Majority, RandomChooser::new(rng.gen()))?;
            let answers: Vec<_> =
                design.iter().map(|qu| oracle.answer(qu).map(|ans| (qu.clone(), ans))).collect::<Result<_>>()?;
            let b = nonadaptive_even_decode(n, l, &answers)?;
            let ok = judge(Strategy::Even, Outcome::Ball(b), &c, 0).is_ok();
            Ok((design.len(), ok))
        }
        name => {
            let st = Strategy::parse(name)?;
            let ratio = a.k.unwrap_or(2);
            let q = a.q.unwrap_or(st.default_q(ratio));
            st.check_q(q, ratio)?;
            let c = random_coloring(&mut rng, n)?;
            let oracle = ChoiceOracle::new(c.clone(), q, st.default_model(ratio), RandomChooser::new(rng.gen()))?;
            let mut sess = Session::new(oracle);
            let o = execute(st, &mut sess, ratio)?;
            Ok((sess.distinct(), judge(st, o, &c, ratio).is_ok()))
        }
    }
}

fn build_design(kind: &str, n: usize, q: Option<usize>, seed: u64) -> Result<Design> {
    match kind {
        "complete" => Design::complete(n, q.unwrap_or(3)),
        "thm3ii" => build_design_thm3ii(n),
        "random56" => Ok(build_design_random56(n, seed)?.design),
        "thm3v" => Ok(build_counterexample_thm3v(n)?.0),
        "even" => {
            let q = q.unwrap_or(4);
            if q % 2 == 1 {
                return Err(Error::Usage("the even construction needs an even --q".into()));
            }
            Design::new(n, q, even_design(n, q / 2)?, format!("even n={n} q={q}"))
        }
        _ => Err(Error::Usage(format!("unknown design kind {kind:?}"))),
    }
}

fn cmd_design(d: DesignCmd) -> Result<i32> {
    match d {
        DesignCmd::Build { kind, n, q, seed, out } => {
            let design = build_design(&kind, n, q, seed)?;
            emit(out.as_deref(), &design.to_text())?;
        }
        DesignCmd::Stats { file } => {
            let design = Design::from_text(&read(&file)?)?;
            emit(None, &codegree_stats(&design).to_json())?;
        }
        DesignCmd::Bounds { file, claims_determining } => {
            let design = Design::from_text(&read(&file)?)?;
            let r = check_thm4_bounds(&design, claims_determining)?;
            emit(None, &serde_json::to_string(&r).expect("report serializes"))?;
            return Ok(if r.violations.is_empty() { 0 } else { 1 });
        }
        DesignCmd::Decode { file, answers } => {
            let design = Design::from_text(&read(&file)?)?;
            let table = assignment_from_json(&read(&answers)?)?;
            let b = match design.q() {
                3 => decode_thm3ii(&design, &table, SelectConfig::MOM3_DEFAULT)?,
                q if q % 2 == 0 => nonadaptive_even_decode(design.n(), q / 2, &table)?,
                q => return Err(Error::Usage(format!("no decoder for query size {q}"))),
            };
            emit(None, &json!({ "ball": b }).to_string())?;
        }
        DesignCmd::Determine { target, n, q, model, out } => {
            let model = AnswerModel::parse(&model)?;
            let design = if Path::new(&target).is_file() {
                Design::from_text(&read(Path::new(&target))?)?
            } else {
                build_design(&target, need_n(n)?, q, 0)?
            };
            let r = design_determines(&design, model, solver_budget()?)?;
            let mut doc = json!({ "n": design.n(), "q": design.q(), "size": design.len(), "determines": r.determines, "nodes": r.nodes });
            if let Some(w) = &r.witness {
                let names: Vec<String> =
                    w.iter().map(|&m| Coloring::from_mask(design.n(), m).map(|c| c.to_string())).collect::<Result<_>>()?;
                doc["witness"] = json!(names);
                if let Some(p) = out {
                    let table = witness_assignment(&design, model, w)?;
                    std::fs::write(p, crate::oracle::assignment_to_json(&table))?;
                }
            }
            emit(None, &doc.to_string())?;
        }
    }
    Ok(0)
}

fn parse_goal(s: &str) -> Result<Goal> {
    if s == "nonminority" || s == "non-minority" {
        return Ok(Goal::NonMinority);
    }
    let a = s
        .strip_prefix("fraction:")
        .and_then(|t| t.parse::<usize>().ok())
        .filter(|&a| a >= 1)
        .ok_or_else(|| Error::Usage(format!("unknown goal {s:?}")))?;
    Ok(Goal::Fraction(a))
}

fn cmd_exact(a: ExactArgs) -> Result<i32> {
    let model = AnswerModel::parse(&a.model)?;
    let goal = parse_goal(&a.goal)?;
    let v = exact_adaptive_complexity(a.n, a.q, model, goal, solver_budget()?)?;
    let value = match v {
        Value::Finite(x) => json!(x),
        Value::Impossible => json!("impossible"),
    };
    emit(None, &json!({ "n": a.n, "q": a.q, "model": model.name(), "value": value }).to_string())?;
    Ok(0)
}
