//! `hopcount`: simulate hopcounts, check extreme-value limits, run event
//! diagnostics and enumerate small instances exactly.

mod config;

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use hopcount_core::diagnostics::beta_exponent;
use hopcount_core::distance::DEFAULT_CUTOFF;
use hopcount_core::enumerate::exact_table;
use hopcount_core::limit::{XiMarginal, MAX_JOINT_K};
use hopcount_core::matching::{Mode, DEFAULT_STUB_CAP};
use hopcount_core::montecarlo::{
    run_experiment, sample_order_stats, write_outputs, ExperimentConfig, GiantsMode, PairMode,
};
use hopcount_core::stats::{ks_one_sample, wilson, Z95};
use hopcount_core::{DegreeLaw, Error};

/// Share of failed replicas above which a run counts as a resource failure.
const MAX_FAILED_SHARE: f64 = 0.10;

#[derive(Parser, Debug)]
#[command(name = "hopcount", version, about, args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Replicated hopcount experiment; writes CSV, JSON and TSV outputs.
    Simulate(SimulateArgs),
    /// Compare top order statistics of the degrees with their limit laws.
    Limitcheck(LimitArgs),
    /// Frequencies of the structural events and the A => H <= 3 check.
    Diagnose(SimulateArgs),
    /// Exact hopcount law of a small degree sequence by full enumeration.
    Oracle(OracleArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Flat key=value file; command-line flags take precedence.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "HOPCOUNT_OUT", default_value = "hopcount-out")]
    out: PathBuf,
    /// Only print errors.
    #[arg(short, long)]
    quiet: bool,
}

#[derive(Args, Debug, Clone)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    /// Power-law exponent, in (1, 2).
    #[arg(long)]
    tau: f64,
    /// Truncation exponent: degrees are conditioned on D < N^alpha (`inf` allowed).
    #[arg(long)]
    alpha: Option<f64>,
    /// Comma-separated node counts; `1e5` style accepted.
    #[arg(long = "n", value_delimiter = ',', value_parser = config::parse_count, required = true)]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    replicas: usize,
    /// Master seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    cutoff: u32,
    /// `topk:K` or `beta`.
    #[arg(long, default_value = "topk:10", value_parser = config::parse_giants)]
    giants: GiantsMode,
    /// Tail level for the endpoint-degree event.
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// Evaluate the structural events on every replica.
    #[arg(long)]
    flags: bool,
    /// `lazy` or `eager` matching.
    #[arg(long, default_value = "lazy", value_parser = config::parse_mode)]
    mode: Mode,
    /// Measure a uniform random pair instead of nodes 1 and 2.
    #[arg(long)]
    random_pair: bool,
    /// Largest stub count accepted in eager mode.
    #[arg(long, default_value_t = DEFAULT_STUB_CAP)]
    stub_cap: u64,
    /// Number of top order statistics recorded per replica.
    #[arg(long, default_value_t = 2)]
    top_m: usize,
}

#[derive(Args, Debug, Clone)]
struct LimitArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    tau: f64,
    #[arg(long = "n", value_parser = config::parse_count)]
    n: usize,
    #[arg(long, default_value_t = 10_000)]
    replicas: usize,
    /// Number of leading order statistics to check (at most 8).
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Largest accepted Kolmogorov-Smirnov distance.
    #[arg(long, default_value_t = 0.02)]
    threshold: f64,
}

#[derive(Args, Debug, Clone)]
struct OracleArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated degrees; the distance is measured between nodes 1 and 2.
    #[arg(long, value_delimiter = ',', required = true)]
    degrees: Vec<u64>,
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    cutoff: u32,
}

/// Why a command did not succeed.
enum Failure {
    Config(String),
    /// Ran to completion, but the check it performs did not pass.
    Check(String),
    Resource(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Other(_) | Failure::Check(_) => 1,
            Failure::Config(_) => 2,
            Failure::Resource(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Check(m) | Failure::Resource(m) | Failure::Other(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Input(_) | Error::Usage(_) | Error::Estimation(_) => Failure::Config(e.to_string()),
            Error::StubCap { .. } | Error::DegreeOverflow => Failure::Resource(e.to_string()),
            Error::Io(_) | Error::Json(_) => Failure::Other(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let raw: Vec<String> = std::env::args().collect();
    let args = match config::expand(raw) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(&a, false),
        Command::Diagnose(a) => simulate(&a, true),
        Command::Limitcheck(a) => limitcheck(&a),
        Command::Oracle(a) => oracle(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn experiment_config(a: &SimulateArgs, diagnose: bool) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(a.tau, a.sizes.clone(), a.replicas, a.seed);
    cfg.alpha = a.alpha;
    cfg.cutoff = a.cutoff;
    cfg.giants = a.giants;
    cfg.epsilon = a.epsilon;
    cfg.collect_flags = a.flags || diagnose;
    cfg.mode = a.mode;
    cfg.pair = if a.random_pair { PairMode::Random } else { PairMode::FirstTwo };
    cfg.stub_cap = a.stub_cap;
    cfg.top_m = a.top_m;
    cfg
}

fn prepare_out(dir: &Path) -> Outcome {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::Config(format!("cannot create output directory {}: {e}", dir.display())))
}

fn write_manifest(dir: &Path, command: &str, config: Value, outputs: &[PathBuf]) -> Outcome {
    let names: Vec<String> = outputs
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    let manifest = json!({
        "tool": "hopcount",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "outputs": names,
    });
    let mut f = BufWriter::new(fs::File::create(dir.join("manifest.json"))?);
    serde_json::to_writer_pretty(&mut f, &manifest).map_err(|e| Failure::Other(e.to_string()))?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

fn simulate(a: &SimulateArgs, diagnose: bool) -> Outcome {
    let cfg = experiment_config(a, diagnose);
    cfg.validate()?;
    let law = cfg.law()?;
    let bound = law.quantile_b(cfg.epsilon)?;
    prepare_out(&a.common.out)?;
    let exp = run_experiment(&cfg)?;
    let mut outputs = write_outputs(&a.common.out, &exp)?;
    let command = if diagnose { "diagnose" } else { "simulate" };
    let quiet = a.common.quiet;

    if !quiet {
        println!("tau = {}  alpha = {}  replicas = {}  seed = {}", cfg.tau, opt(cfg.alpha), cfg.replicas, cfg.master_seed);
    }
    for s in &exp.summary.sizes {
        if quiet {
            break;
        }
        println!("N = {}  (completed {}, failed {})", s.n, s.completed, s.failed);
        for b in s.buckets.iter().filter(|b| b.count > 0) {
            println!("  H = {:>4}  p = {:.4}  [{:.4}, {:.4}]", b.bucket, b.p, b.ci_lo, b.ci_hi);
        }
        if let Some(e) = s.p_hat {
            println!("  p_hat = {:.4}  [{:.4}, {:.4}]", e.p, e.ci_lo, e.ci_hi);
        }
    }

    let mut violations = 0;
    if diagnose {
        let path = a.common.out.join("events.tsv");
        let mut f = BufWriter::new(fs::File::create(&path)?);
        writeln!(f, "N\tevaluated\tno_giants\tB\tC\tD\tA\tP_C\tP_C_lo\tP_C_hi\tgiant_mass\tviolations")?;
        for s in &exp.summary.sizes {
            let e = s.events.clone().unwrap_or_default();
            let (lo, hi) = wilson(e.c, e.evaluated, Z95);
            let pc = if e.evaluated > 0 { e.c as f64 / e.evaluated as f64 } else { f64::NAN };
            writeln!(
                f,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                s.n, e.evaluated, e.no_giants, e.b, e.c, e.d, e.a, pc, lo, hi,
                opt(s.giant_mass_mean), e.violations
            )?;
            violations += e.violations;
            if !quiet {
                println!(
                    "  events at N = {}: B {}  C {}  D {}  A {} of {}  violations {}",
                    s.n, e.b, e.c, e.d, e.a, e.evaluated, e.violations
                );
            }
        }
        f.flush()?;
        outputs.push(path);
        if !quiet {
            println!("b_D,eps = {bound}  (eps = {})", cfg.epsilon);
            if let (GiantsMode::Beta, Some(alpha)) = (cfg.giants, cfg.alpha) {
                println!("beta = {}", beta_exponent(cfg.tau, alpha));
            }
            println!("violations of A => H <= 3: {violations}");
        }
    }

    let mut config = serde_json::to_value(&cfg).map_err(|e| Failure::Other(e.to_string()))?;
    config["endpoint_bound"] = json!(bound);
    write_manifest(&a.common.out, command, config, &outputs)?;

    let failed: u64 = exp.summary.sizes.iter().map(|s| s.failed).sum();
    let total = (cfg.replicas * cfg.sizes.len()) as f64;
    if failed as f64 > MAX_FAILED_SHARE * total {
        let why = exp
            .outcomes
            .iter()
            .find_map(|o| o.failure.clone())
            .unwrap_or_default();
        return Err(Failure::Resource(format!("{failed} of {total} replicas failed: {why}")));
    }
    if violations > 0 {
        return Err(Failure::Check(format!("{violations} replicas had A but a hopcount above 3")));
    }
    Ok(())
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "none".into(), |x| x.to_string())
}

/// Evaluation grid `0.1, 0.2, ..., 5.0`.
fn limit_grid() -> Vec<f64> {
    (1..=50).map(|i| i as f64 / 10.0).collect()
}

fn limitcheck(a: &LimitArgs) -> Outcome {
    if a.k < 1 || a.k > MAX_JOINT_K {
        return Err(Failure::Config(format!("k = {} must lie in 1..={MAX_JOINT_K}", a.k)));
    }
    if a.replicas < 1 {
        return Err(Failure::Config("replicas must be >= 1".into()));
    }
    if a.n < a.k.max(2) {
        return Err(Failure::Config(format!("N = {} is too small for k = {}", a.n, a.k)));
    }
    let law = DegreeLaw::power_law(a.tau)?;
    let marginals: Vec<XiMarginal> = (1..=a.k)
        .map(|j| XiMarginal::new(a.tau, j))
        .collect::<hopcount_core::Result<_>>()?;
    prepare_out(&a.common.out)?;
    let stats = sample_order_stats(&law, a.n, a.replicas, a.k, a.seed)?;
    let columns: Vec<Vec<f64>> = (0..a.k)
        .map(|j| stats.iter().map(|s| s.ratios[j]).collect())
        .collect();

    let mut ks = Vec::with_capacity(a.k);
    for (col, m) in columns.iter().zip(&marginals) {
        ks.push(ks_one_sample(col, |x| m.cdf(x).unwrap_or(0.0)));
    }

    let path = a.common.out.join("limitcheck.tsv");
    let mut f = BufWriter::new(fs::File::create(&path)?);
    let mut header = vec!["x".to_string()];
    for j in 1..=a.k {
        header.push(format!("empirical_{j}"));
        header.push(format!("limit_{j}"));
    }
    writeln!(f, "{}", header.join("\t"))?;
    for x in limit_grid() {
        let mut row = vec![format!("{x}")];
        for (col, m) in columns.iter().zip(&marginals) {
            let below = col.iter().filter(|&&v| v < x).count();
            row.push(format!("{}", below as f64 / col.len() as f64));
            row.push(format!("{}", m.cdf(x)?));
        }
        writeln!(f, "{}", row.join("\t"))?;
    }
    f.flush()?;

    let ks_path = a.common.out.join("limitcheck_ks.tsv");
    let mut f = BufWriter::new(fs::File::create(&ks_path)?);
    writeln!(f, "k\tks\tthreshold\tpass")?;
    for (j, d) in ks.iter().enumerate() {
        writeln!(f, "{}\t{}\t{}\t{}", j + 1, d, a.threshold, *d <= a.threshold)?;
    }
    f.flush()?;

    let config = json!({
        "tau": a.tau,
        "n": a.n,
        "replicas": a.replicas,
        "k": a.k,
        "master_seed": a.seed,
        "threshold": a.threshold,
        "u_n": law.u_n(a.n),
    });
    write_manifest(&a.common.out, "limitcheck", config, &[path, ks_path])?;

    if !a.common.quiet {
        for (j, d) in ks.iter().enumerate() {
            println!("k = {}  KS = {:.5}  (threshold {})", j + 1, d, a.threshold);
        }
    }
    let worst = ks.iter().cloned().fold(0.0, f64::max);
    if worst <= a.threshold {
        Ok(())
    } else {
        Err(Failure::Check(format!("largest KS distance {worst:.5} exceeds {}", a.threshold)))
    }
}

fn oracle(a: &OracleArgs) -> Outcome {
    let table = exact_table(&a.degrees, a.cutoff)?;
    prepare_out(&a.common.out)?;
    let total = table.matchings as f64;
    let hop: Vec<Value> = table
        .hopcount
        .iter()
        .map(|(h, &c)| json!({ "hopcount": h.label(), "count": c, "p": c as f64 / total }))
        .collect();
    let graphs: Vec<Value> = table
        .multigraphs
        .iter()
        .map(|(edges, &c)| {
            let one_based: Vec<[usize; 2]> = edges.iter().map(|&(u, v)| [u + 1, v + 1]).collect();
            json!({ "edges": one_based, "count": c, "p": c as f64 / total })
        })
        .collect();
    let path = a.common.out.join("oracle.json");
    let mut f = BufWriter::new(fs::File::create(&path)?);
    let doc = json!({ "degrees": a.degrees, "matchings": table.matchings, "hopcount": hop, "multigraphs": graphs });
    serde_json::to_writer_pretty(&mut f, &doc).map_err(|e| Failure::Other(e.to_string()))?;
    writeln!(f)?;
    f.flush()?;
    write_manifest(
        &a.common.out,
        "oracle",
        json!({ "degrees": a.degrees, "cutoff": a.cutoff }),
        &[path],
    )?;

    if !a.common.quiet {
        println!("{} matchings", table.matchings);
        for (h, c) in &table.hopcount {
            println!("P(H = {}) = {}/{}", h.label(), c, table.matchings);
        }
        println!("multigraphs (1-based edges):");
        for (edges, c) in &table.multigraphs {
            let list: Vec<String> = edges.iter().map(|(u, v)| format!("{}-{}", u + 1, v + 1)).collect();
            println!("  {}: {}/{}", list.join(" "), c, table.matchings);
        }
    }
    Ok(())
}
