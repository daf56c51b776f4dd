//! `treelab`: command-line front end for counts, laws, samples, predictions
//! and experiments on height-biased random plane trees.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use treelab::asymptotics::{self, RegimeThresholds};
use treelab::counting::{self, cache, Backend, CountTable};
use treelab::experiments::{self, fmt_num, ExperimentConfig};
use treelab::partition;
use treelab::sampler::{BiasedSampler, RngStream};
use treelab::tree::PlaneTree;
use treelab::{Error, LogReal};

/// Significant digits for decimal output of log-domain values.
const DIGITS: usize = 17;

#[derive(Parser)]
#[command(
    name = "treelab",
    version,
    about = "Exact laws and samplers for height-biased random plane trees"
)]
struct Cli {
    /// Worker threads (default: logical cores). Results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Count-table cache directory.
    #[arg(long, global = true, env = "TREELAB_CACHE")]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print Catalan, bounded-height or exact-height counts, build a table,
    /// or parse trees and print their statistics.
    Count(CountArgs),
    /// Height or root-degree law of the biased tree.
    Law(LawArgs),
    /// Exact partition function and the reduced sum W, with asymptotics.
    Zfun(ZfunArgs),
    /// Draw biased trees, one per line.
    Sample(SampleArgs),
    /// Closed-form predictions for (n, mu).
    Asym(AsymArgs),
    /// Run a named experiment; exit code 2 when a gated row fails.
    Exp(ExpArgs),
    /// Manage the count-table cache.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Args)]
struct CountArgs {
    /// Tree size.
    #[arg(long)]
    n: Option<usize>,
    /// Print H(n,m): trees of height < m.
    #[arg(long)]
    m: Option<usize>,
    /// Print E(n,h): trees of height exactly h.
    #[arg(long)]
    h: Option<usize>,
    #[arg(long, value_enum, default_value = "exact")]
    backend: BackendArg,
    /// Build and cache the table with dimensions --n-max, --m-max.
    #[arg(long)]
    build: bool,
    #[arg(long, requires = "build")]
    n_max: Option<usize>,
    #[arg(long, requires = "build")]
    m_max: Option<usize>,
    /// Parse trees in parenthesis form (arguments, else standard input) and
    /// print their statistics.
    #[arg(long)]
    verify_tree: bool,
    /// Trees for --verify-tree.
    trees: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Exact,
    Log,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Backend {
        match b {
            BackendArg::Exact => Backend::Exact,
            BackendArg::Log => Backend::LogApprox,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum LawKind {
    Height,
    RootDegree,
}

#[derive(Clone, Copy, ValueEnum)]
enum LawFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct LawArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    mu: f64,
    #[arg(long, value_enum, default_value = "height")]
    kind: LawKind,
    #[arg(long, value_enum, default_value = "exact")]
    backend: BackendArg,
    #[arg(long, value_enum, default_value = "csv")]
    format: LawFormat,
    /// Largest root degree to compute.
    #[arg(long)]
    r_max: Option<usize>,
}

#[derive(Args)]
struct ZfunArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    mu: f64,
    #[arg(long, value_enum, default_value = "exact")]
    backend: BackendArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum TreeFormat {
    Parens,
    Contour,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    mu: f64,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = experiments::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value = "parens")]
    format: TreeFormat,
    #[arg(long, value_enum, default_value = "exact")]
    backend: BackendArg,
    /// Sample bounded-height trees and reject wrong heights instead of
    /// descending the exact-height recurrence.
    #[arg(long)]
    rejection: bool,
}

#[derive(Args)]
struct AsymArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    mu: f64,
    #[arg(long)]
    json: bool,
    /// Brownian regime when mu sqrt(n) is at most this.
    #[arg(long, default_value_t = RegimeThresholds::default().brownian)]
    brownian: f64,
    /// Extreme regime when mu/n is at least this.
    #[arg(long, default_value_t = RegimeThresholds::default().extreme)]
    extreme: f64,
    /// Lower end of the discrete range of mu/n^{1/4}.
    #[arg(long, default_value_t = RegimeThresholds::default().discrete_lo)]
    discrete_lo: f64,
    /// Upper end of the discrete range of mu/n^{1/4}.
    #[arg(long, default_value_t = RegimeThresholds::default().discrete_hi)]
    discrete_hi: f64,
}

#[derive(Args)]
struct ExpArgs {
    /// Experiment name; omit with --list.
    name: Option<String>,
    /// List experiments.
    #[arg(long)]
    list: bool,
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; `.json` selects JSON, anything else CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Sizes, comma separated; overrides the configuration.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Biases, comma separated; overrides the configuration.
    #[arg(long, value_delimiter = ',')]
    mu: Vec<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
}

#[derive(Subcommand)]
enum CacheAction {
    /// List cached tables.
    List,
    /// Check cached tables (all, or the given files).
    Verify { files: Vec<PathBuf> },
    /// Remove all cached tables.
    Purge,
}

/// Failure kinds mapped to exit codes.
enum Failure {
    Invalid(String, String),
    Gated(String),
    /// Standard output was closed early; not an error.
    BrokenPipe,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Invalid(e.kind().to_string(), e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Failure {
        if e.kind() == io::ErrorKind::BrokenPipe {
            return Failure::BrokenPipe;
        }
        Error::from(e).into()
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Invalid("usage".into(), msg.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("treelab: error[usage]: {first}");
            return ExitCode::from(1);
        }
    };
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("treelab: error[usage]: --workers must be positive");
            return ExitCode::from(1);
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    let cache_dir = cache::resolve_cache_dir(cli.cache_dir.as_deref());
    let mut out = io::stdout().lock();
    let result = match cli.command {
        Command::Count(a) => count(a, &cache_dir, &mut out),
        Command::Law(a) => law(a, &cache_dir, &mut out),
        Command::Zfun(a) => zfun(a, &cache_dir, &mut out),
        Command::Sample(a) => sample(a, &cache_dir, &mut out),
        Command::Asym(a) => asym(a, &mut out),
        Command::Exp(a) => exp(a, &cache_dir, &mut out),
        Command::Cache { action } => cache_cmd(action, &cache_dir, &mut out),
    };
    let _ = out.flush();
    match result {
        Ok(()) | Err(Failure::BrokenPipe) => ExitCode::SUCCESS,
        Err(Failure::Invalid(kind, msg)) => {
            eprintln!("treelab: error[{kind}]: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Gated(msg)) => {
            eprintln!("treelab: error[gate]: {msg}");
            ExitCode::from(2)
        }
    }
}

type Res = Result<(), Failure>;

fn check_mu(mu: f64) -> Result<(), Failure> {
    if mu.is_finite() && mu >= 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("mu must be finite and non-negative, got {mu}")))
    }
}

fn check_n(n: usize) -> Result<(), Failure> {
    if n == 0 {
        Err(invalid("n must be positive"))
    } else {
        Ok(())
    }
}

fn fmt_log(v: &LogReal) -> String {
    format!("{} (log10 {})", v.to_decimal(DIGITS), v.log10())
}

fn count(a: CountArgs, dir: &Path, out: &mut impl Write) -> Res {
    let backend = Backend::from(a.backend);
    if a.verify_tree {
        let lines: Vec<String> = if a.trees.is_empty() {
            io::stdin().lock().lines().collect::<io::Result<_>>()?
        } else {
            a.trees
        };
        for line in lines.iter().map(|l| l.trim()).filter(|l| !l.is_empty()) {
            let t = PlaneTree::from_parens(line)?;
            writeln!(
                out,
                "size={} height={} width={} root_degree={}",
                t.size(),
                t.height(),
                t.width(),
                t.root_degree()
            )?;
        }
        return Ok(());
    }
    if a.build {
        let (Some(n_max), Some(m_max)) = (a.n_max, a.m_max) else {
            return Err(invalid("--build needs --n-max and --m-max"));
        };
        check_n(n_max)?;
        let t = cache::load_or_build(n_max, m_max, backend, Some(dir))?;
        writeln!(
            out,
            "{} fingerprint={}",
            dir.join(cache::file_name(n_max, m_max, backend)).display(),
            t.fingerprint()
        )?;
        return Ok(());
    }
    let Some(n) = a.n else {
        return Err(invalid("count needs --n, --build or --verify-tree"));
    };
    check_n(n)?;
    if a.m.is_some() && a.h.is_some() {
        return Err(invalid("--m and --h are exclusive"));
    }
    let show = |v: LogReal, exact: Option<String>| exact.unwrap_or_else(|| fmt_log(&v));
    let table = |m_need: usize| cache::load_or_build(n, m_need.clamp(1, n), backend, Some(dir));
    match (a.m, a.h) {
        (Some(m), _) => {
            let t = table(m)?;
            let exact = t.as_exact().map(|e| e.h(n, m.min(n)).expect("in table").to_string());
            writeln!(out, "H({n},{m})={}", show(t.h(n, m.min(n))?, exact))?;
        }
        (_, Some(h)) => {
            let t = table(h + 1)?;
            let exact = t
                .as_exact()
                .map(|e| if h < n { e.e(n, h).to_string() } else { "0".into() });
            let v = if h < n { t.e(n, h)? } else { LogReal::ZERO };
            writeln!(out, "E({n},{h})={}", show(v, exact))?;
        }
        _ => {
            let c = counting::catalan(n - 1);
            writeln!(out, "C({})={c}", n - 1)?;
        }
    }
    Ok(())
}

fn table_for(points: &[(usize, f64)], backend: Backend, dir: &Path) -> Result<CountTable, Failure> {
    Ok(partition::table_for(points, backend, Some(dir))?)
}

fn law(a: LawArgs, dir: &Path, out: &mut impl Write) -> Res {
    check_n(a.n)?;
    check_mu(a.mu)?;
    let backend = Backend::from(a.backend);
    let t = table_for(&[(a.n, a.mu)], backend, dir)?;
    let (kind, probs): (&str, Vec<f64>) = match a.kind {
        LawKind::Height => ("height", partition::height_law(a.n, a.mu, &t)?.pmf()),
        LawKind::RootDegree => ("root-degree", partition::root_degree_law(a.n, a.mu, &t, a.r_max)?.pmf()),
    };
    match a.format {
        LawFormat::Csv => {
            writeln!(out, "index,log10_prob,prob")?;
            for (i, p) in probs.iter().enumerate() {
                writeln!(out, "{i},{},{}", fmt_num(p.log10()), fmt_num(*p))?;
            }
        }
        LawFormat::Json => {
            let rows: Vec<_> = probs
                .iter()
                .enumerate()
                .map(|(i, p)| json!({"index": i, "log10_prob": p.log10(), "prob": p}))
                .collect();
            let doc = json!({
                "law": kind,
                "n": a.n,
                "mu": a.mu,
                "backend": backend,
                "table": t.fingerprint(),
                "rows": rows,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("serializes"))?;
        }
    }
    Ok(())
}

fn zfun(a: ZfunArgs, dir: &Path, out: &mut impl Write) -> Res {
    check_n(a.n)?;
    check_mu(a.mu)?;
    let backend = Backend::from(a.backend);
    let t = table_for(&[(a.n, a.mu)], backend, dir)?;
    let z = partition::partition_function(a.n, a.mu, &t)?;
    if a.mu == 0.0 {
        // Z is the Catalan number
        writeln!(out, "Z={}", counting::catalan(a.n - 1))?;
    } else {
        writeln!(out, "Z={}", z.to_decimal(DIGITS))?;
    }
    writeln!(out, "log10Z={}", z.log10())?;
    match partition::w_sum(a.n, a.mu, &t) {
        Ok(w) => writeln!(out, "W={}", fmt_log(&w))?,
        Err(e) => writeln!(out, "W=unavailable ({e})")?,
    }
    if a.n >= 2 && a.mu > 0.0 {
        let asym = asymptotics::partition_asymptotic(a.n, a.mu)?;
        writeln!(out, "regime={}", asym.regime)?;
        for (name, v) in [
            ("regime1", asym.regime1),
            ("regime2", asym.regime2),
            ("regime3", asym.regime3),
        ] {
            if let Some(v) = v {
                writeln!(out, "{name}={} ratio={}", fmt_log(&v), (z / v).to_f64())?;
            }
        }
    }
    Ok(())
}

fn sample(a: SampleArgs, dir: &Path, out: &mut impl Write) -> Res {
    check_n(a.n)?;
    check_mu(a.mu)?;
    let t = table_for(&[(a.n, a.mu)], Backend::from(a.backend), dir)?;
    let s = BiasedSampler::new(a.n, a.mu, &t)?;
    for i in 0..a.count {
        let mut rng = RngStream::new(a.seed, i as u64);
        let tree = if a.rejection {
            s.sample_by_rejection(&mut rng)?
        } else {
            s.sample(&mut rng)
        };
        match a.format {
            TreeFormat::Parens => writeln!(out, "{}", tree.to_parens())?,
            TreeFormat::Contour => writeln!(out, "{}", tree.to_contour().to_ud())?,
        }
    }
    Ok(())
}

fn asym(a: AsymArgs, out: &mut impl Write) -> Res {
    let th = RegimeThresholds {
        brownian: a.brownian,
        extreme: a.extreme,
        discrete_lo: a.discrete_lo,
        discrete_hi: a.discrete_hi,
    };
    let p = asymptotics::height_predictions_with(a.n, a.mu, &th)?;
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&p).expect("serializes"))?;
        return Ok(());
    }
    let v = serde_json::to_value(&p).expect("serializes");
    for (k, val) in v.as_object().expect("object") {
        writeln!(
            out,
            "{k}={}",
            val.as_str().map_or_else(|| val.to_string(), str::to_string)
        )?;
    }
    Ok(())
}

fn exp(a: ExpArgs, dir: &Path, out: &mut impl Write) -> Res {
    if a.list {
        for name in experiments::EXPERIMENTS {
            writeln!(out, "{name}\t{}", experiments::describe(name).unwrap_or(""))?;
        }
        return Ok(());
    }
    let Some(name) = a.name else {
        return Err(invalid("exp needs an experiment name or --list"));
    };
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::from_json(&std::fs::read_to_string(p)?)?,
        None => ExperimentConfig::default(),
    };
    if a.seed.is_some() {
        cfg.seed = a.seed;
    }
    if !a.n.is_empty() {
        cfg.n = Some(a.n);
    }
    if !a.mu.is_empty() {
        cfg.mu = Some(a.mu);
    }
    if a.samples.is_some() {
        cfg.samples = a.samples;
    }
    if let Some(b) = a.backend {
        cfg.backend = Some(b.into());
    }
    cfg.cache_dir = Some(dir.to_path_buf());
    let report = experiments::run_experiment(&name, &cfg)?;
    let json_out = a
        .out
        .as_ref()
        .is_some_and(|p| p.extension().is_some_and(|e| e == "json"));
    let text = if json_out { report.to_json() } else { report.to_csv() };
    match &a.out {
        Some(p) => std::fs::write(p, &text)?,
        None => out.write_all(text.as_bytes())?,
    }
    let failed: Vec<String> = report.failures().map(|r| r.quantity.clone()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Gated(format!("{name}: failed rows: {}", failed.join(", "))))
    }
}

fn cache_cmd(action: CacheAction, dir: &Path, out: &mut impl Write) -> Res {
    match action {
        CacheAction::List => {
            for (p, h) in cache::list(dir)? {
                writeln!(
                    out,
                    "{}\t{}\tn_max={}\tm_max={}",
                    p.display(),
                    h.backend,
                    h.n_max,
                    h.m_max
                )?;
            }
        }
        CacheAction::Verify { files } => {
            let files = if files.is_empty() {
                cache::list(dir)?.into_iter().map(|(p, _)| p).collect()
            } else {
                files
            };
            for p in files {
                cache::verify(&p)?;
                writeln!(out, "{}\tok", p.display())?;
            }
        }
        CacheAction::Purge => {
            let k = cache::purge(dir)?;
            writeln!(out, "removed {k} file(s)")?;
        }
    }
    Ok(())
}
