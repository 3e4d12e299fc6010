//! Command-line driver: ingest price data into a portfolio spec, run the
//! solver/experiment pipelines from a JSON config, or generate synthetic
//! price data with a known dependence structure.
//!
//! Contract: every command honors the resolved seed (flag, then QAWA_SEED,
//! then config, then 42) and writes byte-identical outputs when re-run with
//! the same inputs. Exit codes: 0 success, 2 invalid input, 3 numeric
//! failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use qawa::arith::{cascade_effective, ActivationEncoder};
use qawa::cli_config::{
    resolve_seed, CommandKind, PortfolioFile, ProblemBlock, RunConfig, DEFAULT_OUT_DIR, SEED_ENV_VAR,
};
use qawa::copula::GaussianCopulaSpec;
use qawa::distributed::{even_partition, partition_learn, WorkerReport};
use qawa::error::{Error, Result};
use qawa::experiments::{
    attenuation_csv, benchmark_csv, copula_trace_csv, depth_decay_csv, run_attenuation_analysis,
    run_benchmark, run_copula_experiment, run_depth_decay, run_variance_analysis, variance_csv,
    BenchmarkRow, CopulaTraceRow, DecayFit,
};
use qawa::metrics::{build_validation_report, ReportInputs};
use qawa::oracle::{
    mean_posterior, recursive_weighted_sum, train, train_weights, Batch, QawaOracle, TargetSpec,
    TargetSource, TargetValue,
};
use qawa::problem::{
    brute_force_optimum, brute_force_worst, build_portfolio_qubo, log_returns, parse_price_csv,
    qubo_to_ising, PortfolioSpec,
};
use qawa::qaoa::{energy_expectation, optimize_params, prepare_qaoa_state};
use qawa::rng::RngStream;
use qawa::stats::{mean, normal_quantile, sample_variance};

#[derive(Parser)]
#[command(name = "qawa", version, about = "Portfolio walk-solver simulation driver")]
struct Cli {
    /// Seed override (beats QAWA_SEED and the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (created if missing).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Global shot budget; overrides training shot counts where they apply.
    #[arg(long, global = true)]
    shots: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Convert a price CSV into a portfolio spec (portfolio.json).
    Ingest {
        /// Price CSV with header `date,TICKER1,...`, one row per trading day.
        prices: PathBuf,
    },
    /// Execute the command named in a JSON run configuration.
    Run {
        /// Path to the run configuration.
        #[arg(long)]
        config: PathBuf,
    },
    /// Generate a synthetic price CSV with equicorrelated latent returns.
    Synthetic {
        /// Pairwise latent correlation, |rho| < 1.
        #[arg(long, allow_negative_numbers = true)]
        rho: f64,
        /// Number of assets.
        #[arg(long, default_value_t = 4)]
        assets: usize,
        /// Number of trading days (CSV rows).
        #[arg(long, default_value_t = 252)]
        days: usize,
    },
}

fn main() {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Numeric(_) => 3,
                _ => 2,
            };
            std::process::exit(code);
        }
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    let env_seed = std::env::var(SEED_ENV_VAR).ok();
    match &cli.cmd {
        Cmd::Ingest { prices } => {
            let out = out_dir(cli.out.as_deref(), None)?;
            cmd_ingest(prices, &out)
        }
        Cmd::Run { config } => {
            let text = fs::read_to_string(config)?;
            let cfg = RunConfig::from_json_str(&text)?;
            let seed = resolve_seed(cli.seed, env_seed.as_deref(), cfg.seed)?;
            let out = out_dir(cli.out.as_deref(), cfg.out.as_deref())?;
            cmd_run(&cfg, seed, cli.shots.or(cfg.shots), &out)
        }
        Cmd::Synthetic { rho, assets, days } => {
            let seed = resolve_seed(cli.seed, env_seed.as_deref(), None)?;
            let out = out_dir(cli.out.as_deref(), None)?;
            cmd_synthetic(*rho, *assets, *days, seed, &out)
        }
    }
}

fn out_dir(flag: Option<&Path>, config: Option<&str>) -> Result<PathBuf> {
    let dir = flag
        .map(Path::to_path_buf)
        .or_else(|| config.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_text(path: &Path, mut content: String) -> Result<()> {
    if !content.ends_with('\n') {
        content.push('\n');
    }
    fs::write(path, content)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, serde_json::to_string_pretty(value)?)
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

fn cmd_ingest(prices_path: &Path, out: &Path) -> Result<()> {
    let text = fs::read_to_string(prices_path)?;
    let (tickers, prices) = parse_price_csv(&text)?;
    let returns = log_returns(tickers.clone(), &prices)?;
    for (i, row) in returns.returns.iter().enumerate() {
        if sample_variance(row) <= 0.0 {
            return Err(Error::invalid(format!(
                "zero-variance returns for {} (constant price column?)",
                tickers[i]
            )));
        }
    }
    let mu: Vec<f64> = returns.returns.iter().map(|row| mean(row)).collect();
    let sigma = qawa::problem::covariance_matrix(&returns)?;
    let spec = PortfolioSpec { mu, sigma, lambda: 0.5 };
    spec.validate()?;
    let file = PortfolioFile::from_spec(tickers, &spec)?;
    write_json(&out.join("portfolio.json"), &file)
}

// ---------------------------------------------------------------------------
// synthetic
// ---------------------------------------------------------------------------

/// Gregorian date for a day count since 1970-01-01 (standard civil-calendar
/// arithmetic; valid over the whole range used here).
fn civil_from_days(days: i64) -> (i64, u32, u32) {
    let z = days + 719_468;
    let era = if z >= 0 { z } else { z - 146_096 } / 146_097;
    let doe = (z - era * 146_097) as u64;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe as i64 + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let m = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    (y + i64::from(m <= 2), m, d)
}

/// Day count of 2020-01-01 since the epoch; synthetic calendars start here.
const SYNTHETIC_EPOCH_DAYS: i64 = 18_262;
/// Daily log-return volatility of the synthetic price paths.
const SYNTHETIC_DAILY_VOL: f64 = 0.01;
/// Per-asset daily drift band: asset a gets a deterministic drift in this
/// range, so ingested instances have distinguishable expected returns and a
/// nontrivial selection optimum.
const SYNTHETIC_DRIFT: (f64, f64) = (0.0002, 0.0006);

fn cmd_synthetic(rho: f64, assets: usize, days: usize, seed: u64, out: &Path) -> Result<()> {
    if !(2..=16).contains(&assets) {
        return Err(Error::invalid("assets must lie in 2..=16"));
    }
    if days < 2 {
        return Err(Error::invalid("need at least 2 trading days"));
    }
    if !rho.is_finite() || rho.abs() >= 1.0 {
        return Err(Error::invalid(format!("correlation {rho} outside (−1,1)")));
    }
    let mut r = vec![vec![rho; assets]; assets];
    for (i, row) in r.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let spec = GaussianCopulaSpec::new(r)
        .map_err(|e| Error::invalid(format!("infeasible correlation matrix: {e}")))?;
    let mut rng = RngStream::from_seed(seed);

    let mut csv = String::from("date");
    for a in 1..=assets {
        let _ = write!(csv, ",A{a}");
    }
    csv.push('\n');
    let drift: Vec<f64> = (0..assets)
        .map(|a| {
            let t = if assets > 1 { a as f64 / (assets - 1) as f64 } else { 0.0 };
            SYNTHETIC_DRIFT.0 + t * (SYNTHETIC_DRIFT.1 - SYNTHETIC_DRIFT.0)
        })
        .collect();
    let mut prices = vec![100.0f64; assets];
    for day in 0..days {
        if day > 0 {
            let u = spec.sample_uniform(&mut rng);
            for ((p, ui), d) in prices.iter_mut().zip(&u).zip(&drift) {
                *p *= (d + SYNTHETIC_DAILY_VOL * normal_quantile(*ui)).exp();
            }
        }
        let (y, m, d) = civil_from_days(SYNTHETIC_EPOCH_DAYS + day as i64);
        let _ = write!(csv, "{y:04}-{m:02}-{d:02}");
        for p in &prices {
            let _ = write!(csv, ",{p}");
        }
        csv.push('\n');
    }
    write_text(&out.join("prices.csv"), csv)
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

fn cmd_run(cfg: &RunConfig, seed: u64, shots: Option<u64>, out: &Path) -> Result<()> {
    let base = RngStream::from_seed(seed);
    match cfg.command {
        CommandKind::Qaoa => cmd_qaoa(cfg, seed, &base, out),
        CommandKind::Qawa => cmd_qawa(cfg, seed, shots, &base, out),
        CommandKind::Benchmark => cmd_benchmark(cfg, seed, &base, out),
        CommandKind::Copula => cmd_copula(cfg, seed, &base, out),
        CommandKind::Correlation => cmd_correlation(cfg, seed, &base, out),
        CommandKind::Validate => cmd_validate(cfg, seed, shots, &base, out),
        CommandKind::Distributed => cmd_distributed(cfg, seed, shots, &base, out),
    }
}

/// Load the configured portfolio instance: an ingested spec file when one is
/// named, otherwise a synthetic instance drawn from the given stream.
fn load_problem(block: &ProblemBlock, rng: &mut RngStream) -> Result<(Vec<String>, PortfolioSpec)> {
    match &block.spec {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            PortfolioFile::from_json_str(&text)?.into_spec()
        }
        None => {
            let spec = PortfolioSpec::synthetic(block.n_assets, rng)?;
            let tickers = (1..=block.n_assets).map(|a| format!("A{a}")).collect();
            Ok((tickers, spec))
        }
    }
}

#[derive(Serialize)]
struct QaoaSummary {
    command: &'static str,
    seed: u64,
    tickers: Vec<String>,
    n: usize,
    p: usize,
    energy: f64,
    optimum: f64,
    worst: f64,
    uniform: f64,
    ratio: f64,
    best_assignment: Vec<u8>,
    best_energy: f64,
    trace: Vec<f64>,
}

fn cmd_qaoa(cfg: &RunConfig, seed: u64, base: &RngStream, out: &Path) -> Result<()> {
    let (tickers, spec) = load_problem(&cfg.problem, &mut base.child(0))?;
    let qubo = build_portfolio_qubo(&spec)?;
    let ising = qubo_to_ising(&qubo)?;
    let n = ising.n();
    let (params, trace) = optimize_params(&ising, cfg.qaoa.p, &cfg.qaoa.optimizer, &mut base.child(1))?;
    let state = prepare_qaoa_state(&ising, &params)?;
    let energy = energy_expectation(&state, &ising)?;
    let (best_bits, optimum) = brute_force_optimum(&qubo)?;
    let (_, worst) = brute_force_worst(&qubo)?;
    let table = ising.energy_table();
    let uniform = table.iter().sum::<f64>() / table.len() as f64;
    let summary = QaoaSummary {
        command: "qaoa",
        seed,
        tickers,
        n,
        p: cfg.qaoa.p,
        energy,
        optimum,
        worst,
        uniform,
        ratio: qawa::problem::approximation_ratio(energy, optimum, worst),
        best_assignment: (0..n).map(|i| ((best_bits >> i) & 1) as u8).collect(),
        best_energy: optimum,
        trace,
    };
    write_json(&out.join("summary.json"), &summary)
}

/// Binned distributions of the two branch readouts under the optimized
/// sampling distribution, reduced to the coin's mean Bayesian posterior.
/// The prior is sin²θ; observing a readout updates it by the two branches'
/// likelihoods of producing that value.
fn readout_posterior(oracle: &QawaOracle) -> Result<(f64, f64)> {
    const BINS: usize = 32;
    let state = prepare_qaoa_state(&oracle.ising, &oracle.qaoa_params)?;
    let n = oracle.n_data_qubits();
    let mask = oracle
        .sign_mask
        .iter()
        .enumerate()
        .fold(0u64, |acc, (i, &f)| if f { acc | (1 << i) } else { acc });
    let mut p0 = vec![0.0f64; BINS];
    let mut p1 = vec![0.0f64; BINS];
    let bin = |y: f64| (((y + 1.0) / 2.0 * BINS as f64) as usize).min(BINS - 1);
    for (idx, amp) in state.amplitudes().iter().enumerate() {
        let w = amp.norm_sqr();
        if w <= 0.0 {
            continue;
        }
        let encoded = idx as u64 ^ mask;
        let xs: Vec<f64> = (0..n).map(|i| 1.0 - 2.0 * ((encoded >> i) & 1) as f64).collect();
        let raw = recursive_weighted_sum(&xs, &oracle.weights)?;
        let alt = recursive_weighted_sum(&xs, &oracle.alt_weights)?;
        let y0 = oracle.encoder.activated_value(raw * oracle.encoder.scale_a)?.0;
        let y1 = oracle.encoder.activated_value(alt * oracle.encoder.scale_a)?.0;
        p0[bin(y0)] += w;
        p1[bin(y1)] += w;
    }
    let prior = oracle.coin_theta.sin().powi(2);
    Ok((mean_posterior(&p0, &p1, prior)?, prior))
}

/// Oracle whose sign mask re-encodes the exhaustive-search optimum as the
/// all-+1 string, so the alignment target sits at the top of the readout
/// range and the adaptive coin sees positive sign-adjusted marginals.
fn build_oracle(ising: qawa::problem::IsingModel, params: qawa::qaoa::QaoaParams) -> Result<QawaOracle> {
    let n = ising.n();
    let table = ising.energy_table();
    let best_decision = table
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
        .map(|(i, _)| i as u64)
        .unwrap_or(0);
    let best_measured = !best_decision & ((1u64 << n) - 1);
    let mask: Vec<bool> = (0..n).map(|i| (best_measured >> i) & 1 == 1).collect();
    let mut oracle = QawaOracle::new(
        ising,
        params,
        ActivationEncoder::default(),
        vec![1.0; n.saturating_sub(1)],
        vec![1.0; n.saturating_sub(1)],
        std::f64::consts::FRAC_PI_2,
        mask,
    )?;
    if n >= 2 {
        oracle.set_learned_coefficients(&vec![1.0 / n as f64; n])?;
    }
    Ok(oracle)
}

#[derive(Serialize)]
struct QawaSummary {
    command: &'static str,
    seed: u64,
    tickers: Vec<String>,
    n: usize,
    p: usize,
    target: f64,
    losses: Vec<f64>,
    converged_at: Option<usize>,
    coefficients: Vec<f64>,
    coin_theta: f64,
    mean_posterior: f64,
    prior_expectation: f64,
}

fn cmd_qawa(cfg: &RunConfig, seed: u64, shots: Option<u64>, base: &RngStream, out: &Path) -> Result<()> {
    let (tickers, spec) = load_problem(&cfg.problem, &mut base.child(0))?;
    let ising = qubo_to_ising(&build_portfolio_qubo(&spec)?)?;
    let n = ising.n();
    let (params, _) = optimize_params(&ising, cfg.qaoa.p, &cfg.qaoa.optimizer, &mut base.child(1))?;
    let oracle = build_oracle(ising, params)?;
    let mut training = cfg.qawa.training.clone();
    if let Some(s) = shots {
        training.shots = s;
    }
    let target = match cfg.qawa.target {
        Some(v) => TargetSpec::scalar(v, TargetSource::UserSupplied)?,
        None => TargetSpec::brute_force_alignment(),
    };
    let (trained, trace) = train(&oracle, &target, &training, &base.child(2))?;
    let resolved = qawa::oracle::resolve_target(&oracle, &target)?;
    let target_value = match resolved.y_target {
        TargetValue::Scalar(v) => v,
        TargetValue::PerSample(_) => return Err(Error::invalid("training target must be scalar")),
    };
    let (posterior, prior) = readout_posterior(&trained)?;
    let summary = QawaSummary {
        command: "qawa",
        seed,
        tickers,
        n,
        p: cfg.qaoa.p,
        target: target_value,
        losses: trace.losses.clone(),
        converged_at: trace.converged_at,
        coefficients: cascade_effective(&trained.alt_weights)?.effective,
        coin_theta: trained.coin_theta,
        mean_posterior: posterior,
        prior_expectation: prior,
    };
    write_json(&out.join("summary.json"), &summary)
}

#[derive(Serialize)]
struct BenchmarkSummary {
    command: &'static str,
    seed: u64,
    sizes: Vec<usize>,
    p: usize,
    rows: Vec<BenchmarkRow>,
}

fn cmd_benchmark(cfg: &RunConfig, seed: u64, base: &RngStream, out: &Path) -> Result<()> {
    let exp = &cfg.experiment;
    let outcome = run_benchmark(&exp.sizes, exp.p, &exp.benchmark, base)?;
    write_text(&out.join("benchmark.csv"), benchmark_csv(exp.p, &exp.benchmark, seed, &outcome.rows)?)?;
    let summary = BenchmarkSummary {
        command: "benchmark",
        seed,
        sizes: exp.sizes.clone(),
        p: exp.p,
        rows: outcome.rows,
    };
    write_json(&out.join("summary.json"), &summary)
}

#[derive(Serialize)]
struct CopulaSummary {
    command: &'static str,
    seed: u64,
    iterations: usize,
    final_kl: f64,
    final_distance: f64,
    final_correlations: Vec<Vec<f64>>,
}

fn cmd_copula(cfg: &RunConfig, seed: u64, base: &RngStream, out: &Path) -> Result<()> {
    let outcome = run_copula_experiment(&cfg.copula, base)?;
    write_text(&out.join("copula_trace.csv"), copula_trace_csv(&cfg.copula, seed, &outcome.rows)?)?;
    let last: &CopulaTraceRow = outcome.rows.last().expect("at least one iteration");
    let summary = CopulaSummary {
        command: "copula",
        seed,
        iterations: outcome.rows.len(),
        final_kl: last.kl,
        final_distance: last.distance,
        final_correlations: last.correlations.clone(),
    };
    write_json(&out.join("summary.json"), &summary)
}

#[derive(Serialize)]
struct CorrelationSummary {
    command: &'static str,
    seed: u64,
    attenuation_rows: usize,
    variance_scaling: String,
    decay_fits: Vec<DecayFit>,
}

fn cmd_correlation(cfg: &RunConfig, seed: u64, base: &RngStream, out: &Path) -> Result<()> {
    let corr = &cfg.experiment.correlation;
    let attenuation = run_attenuation_analysis(corr)?;
    write_text(&out.join("fig4a.csv"), attenuation_csv(corr, seed, &attenuation)?)?;
    let variance = run_variance_analysis(corr, &base.child(0))?;
    write_text(&out.join("fig4b.csv"), variance_csv(corr, seed, &variance)?)?;
    let decay = run_depth_decay(corr, &base.child(1))?;
    write_text(&out.join("fig4c.csv"), depth_decay_csv(corr, seed, &decay)?)?;
    let summary = CorrelationSummary {
        command: "correlation",
        seed,
        attenuation_rows: attenuation.len(),
        variance_scaling: variance.scaling,
        decay_fits: decay.fits,
    };
    write_json(&out.join("summary.json"), &summary)
}

/// Draw a uniform-simplex point (normalized exponentials).
fn random_simplex(n: usize, rng: &mut RngStream) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -rng.uniform().max(1e-300).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|v| v / total).collect()
}

fn cmd_validate(cfg: &RunConfig, _seed: u64, shots: Option<u64>, base: &RngStream, out: &Path) -> Result<()> {
    let (_tickers, spec) = load_problem(&cfg.problem, &mut base.child(0))?;
    let ising = qubo_to_ising(&build_portfolio_qubo(&spec)?)?;
    let n = ising.n();
    let (params, _) = optimize_params(&ising, cfg.qaoa.p, &cfg.qaoa.optimizer, &mut base.child(1))?;

    // Noiseless replay reconstruction of a random simplex target.
    let mut training = cfg.qawa.training.clone();
    if let Some(s) = shots {
        training.shots = s;
    }
    let encoder = ActivationEncoder::default();
    let target_weights = random_simplex(n, &mut base.child(2));
    let batch = Batch::full_enumeration(n, &encoder)?;
    let ys: Vec<f64> = batch
        .xs
        .iter()
        .map(|xs| {
            let s: f64 = target_weights.iter().zip(xs).map(|(c, x)| c * x).sum();
            encoder.activated_value(s * encoder.scale_a).map(|(y, _)| y)
        })
        .collect::<Result<_>>()?;
    let target = TargetSpec::per_sample(ys, TargetSource::UserSupplied)?;
    let (learned, _) = train_weights(&batch, &target, &vec![1.0 / n as f64; n], &training)?;
    let total: f64 = learned.iter().sum();
    let recovered: Vec<f64> = if total > 0.0 { learned.iter().map(|w| w / total).collect() } else { learned };

    // Dependence learning on the configured ground truth.
    let cop = run_copula_experiment(&cfg.copula, &base.child(3))?;
    let final_distance = cop.rows.last().expect("at least one iteration").distance;

    // Walk-vs-sampler comparison on this problem size.
    let bench = run_benchmark(&[n], cfg.experiment.p, &cfg.experiment.benchmark, &base.child(4))?;
    let mean_of = |method: &str| {
        bench
            .rows
            .iter()
            .find(|r| r.method == method)
            .map(|r| r.mean)
            .ok_or_else(|| Error::invalid(format!("missing benchmark method {method}")))
    };
    let final_qawa = mean_of("qawa")?;
    let final_qaoa = mean_of("qaoa")?;

    // Coin posterior of a trained oracle on this instance.
    let oracle = build_oracle(ising, params)?;
    let (trained, _) = train(&oracle, &TargetSpec::brute_force_alignment(), &training, &base.child(5))?;
    let (posterior, _prior) = readout_posterior(&trained)?;

    let inputs = ReportInputs {
        mean_posterior: Some(posterior),
        coin_thetas: vec![trained.coin_theta],
        recovered_weights: Some(recovered),
        target_weights: Some(target_weights),
        copula_distance: Some(final_distance),
        final_qawa: Some(final_qawa),
        final_qaoa: Some(final_qaoa),
    };
    let report = build_validation_report(&inputs)?;
    write_json(&out.join("report.json"), &report)
}

#[derive(Serialize)]
struct DistributedSummary {
    command: &'static str,
    seed: u64,
    workers: Vec<WorkerReport>,
    global_c: Vec<Vec<f64>>,
    total_loss: f64,
    converged: bool,
}

fn cmd_distributed(cfg: &RunConfig, seed: u64, shots: Option<u64>, base: &RngStream, out: &Path) -> Result<()> {
    let (_tickers, spec) = load_problem(&cfg.problem, &mut base.child(0))?;
    let ising = qubo_to_ising(&build_portfolio_qubo(&spec)?)?;
    let subsets = even_partition(ising.n(), cfg.distributed.workers)?;
    let mut pcfg = cfg.distributed.config.clone();
    if let Some(s) = shots {
        pcfg.training.shots = s;
        pcfg.sample_shots = s;
    }
    let outcome = partition_learn(&ising, &subsets, &pcfg, seed)?;
    let summary = DistributedSummary {
        command: "distributed",
        seed,
        workers: outcome.workers.iter().map(|w| w.report()).collect(),
        global_c: outcome.global_c,
        total_loss: outcome.total_loss,
        converged: outcome.converged,
    };
    write_json(&out.join("summary.json"), &summary)
}
