//! The `ssmlab` command-line front end.
//!
//! Every randomized subcommand requires `--seed`; the same seed and flags give
//! byte-identical CSV files. Options can also come from a `--config` file of
//! `key = value` lines (`#` starts a comment); flags given on the command line
//! take precedence over the file.
//!
//! Exit codes: `0` success, `1` usage or runtime error, `2` a convergence
//! study finished with diverged records.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dynsys::{sample_dataset, DatasetOptions, SystemKind};
use crate::fmt::sig17;
use crate::harness::{self, median_error, run_convergence_study, s4_coefficient, s6_coefficient, BoundInputs};
use crate::metric::{embed_trajectory, mu_profile, spearman, EmbeddingSpec, MetricConfig, SequenceSample};
use crate::ssm::Flavor;
use crate::stagewise::{self, omega_recovery_dataset, run_stagewise, RidgeS4Trainer, StageSchedule, Strategy};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "ssmlab",
    version,
    about = "Temporal-continuity experiments for diagonal state-space models"
)]
#[command(args_override_self = true)]
pub struct Cli {
    /// Seed for every random stream (required by randomized commands).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output CSV path; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// File of `key = value` option lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads; output does not depend on this.
    #[arg(long, global = true, env = "SSMLAB_THREADS", default_value_t = 1)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Discretization error against an RK4 reference over step sizes and input scales.
    Converge(ConvergeArgs),
    /// Sample dynamical-system trajectories.
    GenDynsys(GenArgs),
    /// Continuity score across embedding mixtures.
    Metric(MetricArgs),
    /// Stage-wise training with temporal subsampling.
    Stagewise(StagewiseArgs),
    /// Evaluate first-order error bound coefficients.
    Bounds(BoundsArgs),
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub pairs: u64,
    /// Smallest step is `2^-tau-min-exp`.
    #[arg(long, default_value_t = 10)]
    pub tau_min_exp: i32,
    /// Largest step is `2^-tau-max-exp`.
    #[arg(long, default_value_t = 2)]
    pub tau_max_exp: i32,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0])]
    pub scales: Vec<f64>,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    pub states: u64,
    /// Reference step is `2^-ref-exp`.
    #[arg(long, default_value_t = 14)]
    pub ref_exp: i32,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub kind: SystemKind,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub count: u64,
    #[arg(long, default_value_t = 10.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 0.01)]
    pub tau0: f64,
    /// Pin a parameter or initial condition, e.g. `--param sigma=0`.
    #[arg(long = "param", value_parser = parse_kv)]
    pub params: Vec<(String, f64)>,
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    #[arg(long, default_value = "vdp")]
    pub kind: SystemKind,
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(1..))]
    pub count: u64,
    #[arg(long, default_value_t = 10.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 0.01)]
    pub tau0: f64,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.1, 0.25, 0.4, 0.5, 0.6, 0.75, 0.9, 1.0])]
    pub etas: Vec<f64>,
    /// Largest lag; lags `1..=lags` are reported.
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u64).range(1..))]
    pub lags: u64,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub far_pairs: u64,
    #[arg(long)]
    pub gap: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Indexing,
    Pooling,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

#[derive(Debug, Args)]
pub struct StagewiseArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![4usize, 2, 1])]
    pub strides: Vec<usize>,
    /// One value for every stage, or one per stage.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1usize])]
    pub epochs: Vec<usize>,
    #[arg(long, value_enum, default_value_t = StrategyArg::Indexing)]
    pub strategy: StrategyArg,
    /// Step size at the first (coarsest) stage.
    #[arg(long, default_value_t = 0.04)]
    pub delta: f64,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(2..))]
    pub count: u64,
    #[arg(long, default_value_t = 2.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(1..))]
    pub states: u64,
    #[arg(long, default_value_t = stagewise::DEFAULT_LAMBDA)]
    pub lambda: f64,
    /// `off` writes 0 in the wall-time column.
    #[arg(long, value_enum, default_value_t = Toggle::On)]
    pub timing: Toggle,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Print the S4 coefficient.
    #[arg(long)]
    pub s4: bool,
    /// Print the S6 coefficient.
    #[arg(long)]
    pub s6: bool,
    /// Print the general coefficient.
    #[arg(long)]
    pub general: bool,
    #[arg(long, default_value_t = 1.0)]
    pub bnorm: f64,
    #[arg(long, default_value_t = 1.0)]
    pub cnorm: f64,
    /// S4 step size.
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub anorm: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lu: f64,
    /// Maximum input modulus.
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    /// S6 selectivity weight.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub w: f64,
    /// S6 selectivity bias.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub b_delta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub lb: f64,
    #[arg(long, default_value_t = 0.0)]
    pub lc: f64,
    #[arg(long, default_value_t = 0.0)]
    pub ldelta: f64,
    /// Defaults to `--bnorm`.
    #[arg(long)]
    pub mb: Option<f64>,
    /// Defaults to `--cnorm`.
    #[arg(long)]
    pub mc: Option<f64>,
    /// Defaults to `--delta`.
    #[arg(long)]
    pub mdelta: Option<f64>,
}

fn parse_kv(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("bad value in `{s}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

const SUBCOMMANDS: [&str; 5] = ["converge", "gen-dynsys", "metric", "stagewise", "bounds"];

/// Parses `key = value` lines into long flags. `true` / `false` toggle
/// boolean flags.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("config line {}: expected key = value", i + 1)))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(Error::invalid(format!("config line {}: invalid key", i + 1)));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

fn find_config(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter().skip(1);
    let mut found = None;
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            found = it.next().map(PathBuf::from);
        } else if let Some(p) = s.strip_prefix("--config=") {
            found = Some(PathBuf::from(p));
        }
    }
    found
}

/// Splices config-file options into `args` right after the subcommand, skipping
/// any option already present on the command line.
fn splice_config(args: Vec<OsString>, entries: &[(String, String)]) -> Vec<OsString> {
    let given: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let present = |key: &str| {
        let flag = format!("--{key}");
        given.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")))
    };
    let mut extra: Vec<OsString> = Vec::new();
    for (k, v) in entries {
        if present(k) {
            continue;
        }
        match v.as_str() {
            "true" => extra.push(format!("--{k}").into()),
            "false" => {}
            _ => extra.push(format!("--{k}={v}").into()),
        }
    }
    let pos = given
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.as_str()))
        .map_or(given.len(), |p| p + 1);
    let mut out = args;
    out.splice(pos..pos, extra);
    out
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    if let Some(path) = find_config(&args) {
        match std::fs::read_to_string(&path)
            .map_err(Error::from)
            .and_then(|t| parse_config(&t))
        {
            Ok(entries) => args = splice_config(args, &entries),
            Err(e) => {
                eprintln!("error: config {}: {e}", path.display());
                return 1;
            }
        }
    }
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads.max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return 1;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(code) => code,
        // a closed downstream pipe (e.g. `| head`) is not a failure
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn require_seed(cli: &Cli) -> Result<u64> {
    cli.seed
        .ok_or_else(|| Error::invalid("this command is randomized and needs an explicit --seed"))
}

/// The CSV sink plus a writer for human-readable summaries (standard output
/// when the CSV goes to a file, standard error otherwise).
fn sinks(out: Option<&Path>) -> Result<(Box<dyn Write>, Box<dyn Write>)> {
    match out {
        Some(p) => Ok((Box::new(BufWriter::new(File::create(p)?)), Box::new(io::stdout()))),
        None => Ok((Box::new(BufWriter::new(io::stdout())), Box::new(io::stderr()))),
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Converge(a) => cmd_converge(a, require_seed(cli)?, out),
        Command::GenDynsys(a) => cmd_gen_dynsys(a, require_seed(cli)?, out),
        Command::Metric(a) => cmd_metric(a, require_seed(cli)?, out),
        Command::Stagewise(a) => cmd_stagewise(a, require_seed(cli)?, out),
        Command::Bounds(a) => cmd_bounds(a, out),
    }
}

fn cmd_converge(a: &ConvergeArgs, seed: u64, out: Option<&Path>) -> Result<i32> {
    if a.tau_max_exp > a.tau_min_exp || a.tau_max_exp < 0 {
        return Err(Error::invalid("need 0 <= tau-max-exp <= tau-min-exp"));
    }
    if a.ref_exp < a.tau_min_exp || a.ref_exp > 30 {
        return Err(Error::invalid("ref-exp must lie between tau-min-exp and 30"));
    }
    let cfg = harness::StudyConfig {
        n_pairs: a.pairs as usize,
        taus: (a.tau_max_exp..=a.tau_min_exp).rev().map(|e| 2f64.powi(-e)).collect(),
        scales: a.scales.clone(),
        n_states: a.states as usize,
        tau_ref: 2f64.powi(-a.ref_exp),
        ..harness::StudyConfig::new(seed)
    };
    let records = run_convergence_study(&cfg)?;
    let (mut csv, mut info) = sinks(out)?;
    harness::write_csv(&records, &mut csv)?;
    csv.flush()?;

    // the step closest to 2^-8 on a log scale
    let tau = cfg
        .taus
        .iter()
        .copied()
        .min_by(|x, y| (x.log2() + 8.0).abs().total_cmp(&(y.log2() + 8.0).abs()))
        .expect("validated grid is non-empty");
    writeln!(info, "median rel_max_error at tau = {}", sig17(tau))?;
    writeln!(info, "{:<8}{:<10}{:>20}{:>24}", "flavor", "method", "scale", "median")?;
    for flavor in [Flavor::S4, Flavor::S6] {
        for &method in &cfg.methods {
            for &scale in &cfg.scales {
                let m = median_error(&records, flavor, method, tau, scale).unwrap_or(f64::NAN);
                writeln!(
                    info,
                    "{:<8}{:<10}{:>20}{:>24}",
                    flavor.name(),
                    method.name(),
                    sig17(scale),
                    sig17(m)
                )?;
            }
        }
    }
    let diverged = records.iter().filter(|r| r.diverged).count();
    if diverged > 0 {
        writeln!(
            info,
            "warning: {diverged} records diverged and were excluded from the medians"
        )?;
        return Ok(2);
    }
    Ok(0)
}

fn cmd_gen_dynsys(a: &GenArgs, seed: u64, out: Option<&Path>) -> Result<i32> {
    let opts = DatasetOptions {
        horizon: a.horizon,
        tau0: a.tau0,
        overrides: a.params.clone(),
    };
    let data = sample_dataset(a.kind, a.count as usize, seed, &opts)?;
    let (mut csv, _) = sinks(out)?;
    writeln!(csv, "sample_id,kind,param_json,t,x")?;
    for (i, (traj, params)) in data.iter().enumerate() {
        let kv = params.to_kv_string();
        for (t, x) in traj.times().iter().zip(traj.values()) {
            writeln!(csv, "{i},{},{kv},{},{}", a.kind, sig17(*t), sig17(*x))?;
        }
    }
    csv.flush()?;
    Ok(0)
}

/// `μ_t` for every lag and the aggregate score at each mixing weight.
pub fn metric_sweep(
    kind: SystemKind,
    count: usize,
    opts: &DatasetOptions,
    etas: &[f64],
    cfg: &MetricConfig,
    seed: u64,
) -> Result<Vec<(f64, Vec<f64>, f64)>> {
    let data = sample_dataset(kind, count, seed, opts)?;
    let spec = EmbeddingSpec::random(seed);
    etas.iter()
        .map(|&eta| {
            let seqs = data
                .iter()
                .map(|(traj, _)| embed_trajectory(traj, eta, &spec))
                .collect::<Result<Vec<SequenceSample>>>()?;
            let p = mu_profile(&seqs, cfg, seed)?;
            Ok((eta, p.mu_by_lag, p.total))
        })
        .collect()
}

fn cmd_metric(a: &MetricArgs, seed: u64, out: Option<&Path>) -> Result<i32> {
    let cfg = MetricConfig {
        max_lag: a.lags as usize,
        gap: a.gap,
        far_pair_samples: a.far_pairs as usize,
        ..Default::default()
    };
    let opts = DatasetOptions {
        horizon: a.horizon,
        tau0: a.tau0,
        overrides: Vec::new(),
    };
    let rows = metric_sweep(a.kind, a.count as usize, &opts, &a.etas, &cfg, seed)?;
    let (mut csv, mut info) = sinks(out)?;
    writeln!(csv, "eta,lag,mu")?;
    for (eta, mus, _) in &rows {
        for (t, mu) in mus.iter().enumerate() {
            writeln!(csv, "{},{},{}", sig17(*eta), t + 1, sig17(*mu))?;
        }
    }
    writeln!(csv, "eta,mu_total")?;
    for (eta, _, total) in &rows {
        writeln!(csv, "{},{}", sig17(*eta), sig17(*total))?;
    }
    csv.flush()?;
    if rows.len() >= 2 {
        let etas: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let mu1: Vec<f64> = rows.iter().map(|r| r.1[0]).collect();
        writeln!(info, "spearman(eta, mu_1) = {}", sig17(spearman(&etas, &mu1)?))?;
    }
    Ok(0)
}

fn cmd_stagewise(a: &StagewiseArgs, seed: u64, out: Option<&Path>) -> Result<i32> {
    let epochs = match a.epochs.as_slice() {
        [e] => vec![*e; a.strides.len()],
        list => list.to_vec(),
    };
    let strategy = match a.strategy {
        StrategyArg::Indexing => Strategy::Indexing,
        StrategyArg::Pooling => Strategy::Pooling,
    };
    let sched = StageSchedule::new(a.strides.clone(), epochs, strategy)?;
    let data = omega_recovery_dataset(a.count as usize, a.horizon, seed)?;
    let mut trainer = RidgeS4Trainer::new(a.states as usize, a.lambda, seed)?;
    let reports = run_stagewise(&data, &sched, a.delta, &mut trainer, seed)?;
    let (mut csv, _) = sinks(out)?;
    stagewise::write_csv(&reports, a.timing == Toggle::On, &mut csv)?;
    csv.flush()?;
    Ok(0)
}

fn cmd_bounds(a: &BoundsArgs, out: Option<&Path>) -> Result<i32> {
    let all = !(a.s4 || a.s6 || a.general);
    let inputs = BoundInputs {
        l_u: a.lu,
        l_b: a.lb,
        l_c: a.lc,
        l_delta: a.ldelta,
        m_u: a.mu,
        m_b: a.mb.unwrap_or(a.bnorm),
        m_c: a.mc.unwrap_or(a.cnorm),
        m_delta: a.mdelta.unwrap_or(a.delta),
        a_norm: a.anorm,
    };
    inputs.validate()?;
    if !(a.w.is_finite() && a.b_delta.is_finite()) {
        return Err(Error::invalid("w and b-delta must be finite"));
    }
    let (mut w, _) = sinks(out)?;
    writeln!(w, "name,value")?;
    if all || a.general {
        writeln!(w, "general,{}", sig17(harness::bound_general(&inputs)?))?;
    }
    if all || a.s4 {
        let v = s4_coefficient(a.bnorm, a.cnorm, a.delta, a.anorm, a.lu);
        writeln!(w, "s4,{}", sig17(v))?;
    }
    if all || a.s6 {
        let v = s6_coefficient(a.bnorm, a.cnorm, a.w, a.b_delta, a.anorm, a.lu, a.mu);
        writeln!(w, "s6,{}", sig17(v))?;
    }
    w.flush()?;
    Ok(0)
}
