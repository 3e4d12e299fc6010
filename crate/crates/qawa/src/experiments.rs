//! Scripted end-to-end analyses: the dependence-learning curve, the cascade
//! attenuation/variance/depth studies, and the solver benchmark, each
//! returning plot-ready rows plus a CSV emitter whose header records the
//! generating configuration hash and seed.
//!
//! Every run is reproducible bit-for-bit under a fixed seed: all stochastic
//! work draws from sub-streams derived from fixed indices, and concurrent
//! fan-out (per size/seed, per grid cell) aggregates in task order, never in
//! completion order.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::thread;

use serde::{Deserialize, Serialize};

use crate::arith::{cascade_gates, ActivationEncoder};
use crate::copula::{
    copula_distance, empirical_copula_from_columns, gaussian_copula_grid_pairwise, kl_divergence,
    CopulaMode, EmpiricalCopula, GaussianCopulaSpec,
};
use crate::error::{Error, Result};
use crate::oracle::{classical_branch_mixture, resolve_target, QawaOracle, TargetSpec, TargetValue};
use crate::problem::{build_portfolio_qubo, qubo_to_ising, PortfolioSpec};
use crate::qaoa::{
    eigen_energy_table, energy_expectation, optimize_params, prepare_qaoa_state, OptimizerConfig,
};
use crate::rng::RngStream;
use crate::sim::{GateOp, StateVector};
use crate::stats;

/// Spread of the random single-qubit rotation angles, per layer, in the
/// depth-decay circuits. Small enough that one layer only partially
/// scrambles a qubit, so the input-output correlation decays gradually
/// rather than collapsing after the first layer.
pub const DECAY_LAYER_SIGMA: f64 = 0.35;

/// Mean-correlation floor below which a depth point is considered noise and
/// excluded from the exponential fit.
const FIT_FLOOR: f64 = 5e-3;

/// Shared knobs for the correlation analyses (attenuation, variance, depth
/// decay).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrelationExperimentConfig {
    /// Width of the simulated register.
    pub n_qubits: usize,
    /// Monte-Carlo sample count per estimate.
    pub samples: u64,
    /// Independent repetitions used for error bars.
    pub trials: u64,
    /// Uniform block weight for the attenuation series.
    pub weight: f64,
    /// Maximum entangling-layer retention fraction swept by the depth-decay
    /// analysis (each retained layer is a CX brickwork).
    pub xi: f64,
    /// Circuit depths evaluated by the depth-decay analysis.
    pub depth_sweep: Vec<usize>,
}

impl Default for CorrelationExperimentConfig {
    fn default() -> Self {
        CorrelationExperimentConfig {
            n_qubits: 8,
            samples: 1000,
            trials: 5,
            weight: 0.5,
            xi: 1.0,
            depth_sweep: vec![0, 1, 2, 4, 6, 8],
        }
    }
}

impl CorrelationExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=20).contains(&self.n_qubits) {
            return Err(Error::invalid("register width must lie in 1..=20"));
        }
        if self.samples < 2 {
            return Err(Error::invalid("need at least two samples"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("need at least one trial"));
        }
        if !self.weight.is_finite() || !(0.0..=1.0).contains(&self.weight) {
            return Err(Error::invalid(format!("weight {} outside [0,1]", self.weight)));
        }
        if !self.xi.is_finite() || !(0.0..=1.0).contains(&self.xi) {
            return Err(Error::invalid(format!("entangling fraction {} outside [0,1]", self.xi)));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Dependence-learning curve
// ---------------------------------------------------------------------------

/// Configuration of the dependence-learning experiment: a sector-structured
/// Gaussian ground truth is sampled in batches, and after every batch the
/// accumulated evidence is re-estimated and scored against the gridded
/// truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CopulaLearnConfig {
    /// Number of assets; asset i belongs to sector i/2.
    pub n_assets: usize,
    /// Latent correlation within a sector.
    pub rho_intra: f64,
    /// Latent correlation across sectors.
    pub rho_cross: f64,
    /// Entry i true gives asset i a negative contribution sign, flipping its
    /// uniform scores u → 1−u before estimation.
    pub sign_mask: Vec<bool>,
    /// Number of estimation rounds.
    pub iterations: usize,
    /// Fresh samples drawn per round.
    pub batch: usize,
    /// Copula lattice resolution.
    pub grid: usize,
}

impl Default for CopulaLearnConfig {
    fn default() -> Self {
        CopulaLearnConfig {
            n_assets: 4,
            rho_intra: 0.7,
            rho_cross: 0.2,
            sign_mask: vec![false, false, true, true],
            iterations: 150,
            batch: 400,
            grid: 20,
        }
    }
}

impl CopulaLearnConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=16).contains(&self.n_assets) {
            return Err(Error::invalid("asset count must lie in 2..=16"));
        }
        if self.sign_mask.len() != self.n_assets {
            return Err(Error::invalid("sign mask length must match the asset count"));
        }
        if self.iterations == 0 || self.batch == 0 {
            return Err(Error::invalid("iterations and batch size must be positive"));
        }
        if !(2..=2000).contains(&self.grid) {
            return Err(Error::invalid("grid resolution must lie in 2..=2000"));
        }
        for rho in [self.rho_intra, self.rho_cross] {
            if !rho.is_finite() || rho.abs() >= 1.0 {
                return Err(Error::invalid(format!("latent correlation {rho} outside (−1,1)")));
            }
        }
        Ok(())
    }

    /// Latent correlation matrix under the sector rule (unit diagonal,
    /// intra-sector `rho_intra`, cross-sector `rho_cross`).
    pub fn correlation_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.n_assets;
        let mut r = vec![vec![0.0f64; n]; n];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = if i == j {
                    1.0
                } else if i / 2 == j / 2 {
                    self.rho_intra
                } else {
                    self.rho_cross
                };
            }
        }
        r
    }
}

/// One estimation round: divergence and distance to the gridded truth,
/// plus the pairwise Pearson correlations of the sign-adjusted scores
/// accumulated so far.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopulaTraceRow {
    pub iteration: usize,
    pub kl: f64,
    pub distance: f64,
    pub correlations: Vec<Vec<f64>>,
}

/// Everything the learning experiment produces: the per-round trace, the
/// final empirical estimate, and the gridded truth it was scored against.
#[derive(Debug, Clone, PartialEq)]
pub struct CopulaLearnOutcome {
    pub rows: Vec<CopulaTraceRow>,
    pub estimate: EmpiricalCopula,
    pub truth: EmpiricalCopula,
}

fn pearson_matrix(columns: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = columns.len();
    let mut m = vec![vec![1.0f64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let r = stats::pearson(&columns[i], &columns[j]);
            m[i][j] = r;
            m[j][i] = r;
        }
    }
    m
}

/// Run the dependence-learning experiment: accumulate latent-uniform samples
/// batch by batch, re-estimate the pairwise empirical copula after each
/// batch, and score it against the quadrature ground truth of the
/// sign-adjusted latent model.
///
/// Sign handling: a negative contribution sign flips that asset's uniform
/// scores u → 1−u, which conjugates the Gaussian dependence exactly
/// (ρ_ij → s_i·s_j·ρ_ij), so cross-sector pairs with opposite signs come out
/// negatively correlated while same-sign pairs keep their positive intra
/// correlation.
///
/// The divergence column is the per-panel mean KL between the smoothed
/// estimated cell masses and the quadrature truth; the distance column is
/// the lattice-mean absolute CDF gap. Both shrink as evidence accumulates —
/// the trace trends down (best-so-far monotone) toward the binning floor.
pub fn run_copula_experiment(cfg: &CopulaLearnConfig, rng: &RngStream) -> Result<CopulaLearnOutcome> {
    cfg.validate()?;
    let n = cfg.n_assets;
    let spec = GaussianCopulaSpec::new(cfg.correlation_matrix())?;
    let signs: Vec<f64> = cfg.sign_mask.iter().map(|&f| if f { -1.0 } else { 1.0 }).collect();
    let mut adjusted_r = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in 0..n {
            adjusted_r[i][j] = if i == j { 1.0 } else { signs[i] * signs[j] * spec.rho(i, j) };
        }
    }
    let truth = gaussian_copula_grid_pairwise(&GaussianCopulaSpec::new(adjusted_r)?, cfg.grid)?;

    let mut sampler = rng.child(0);
    let jitter = rng.child(1);
    let mut adjusted: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.iterations * cfg.batch); n];
    let mut rows = Vec::with_capacity(cfg.iterations);
    let mut estimate = None;
    for iteration in 1..=cfg.iterations {
        for _ in 0..cfg.batch {
            let u = spec.sample_uniform(&mut sampler);
            for (col, (&ui, &flip)) in adjusted.iter_mut().zip(u.iter().zip(&cfg.sign_mask)) {
                col.push(if flip { 1.0 - ui } else { ui });
            }
        }
        let est = empirical_copula_from_columns(&adjusted, CopulaMode::Pairwise, cfg.grid, &jitter)?;
        let mut kl_sum = 0.0;
        for (pe, pt) in est.panels.iter().zip(&truth.panels) {
            kl_sum += kl_divergence(&pe.density, &pt.density)?;
        }
        let kl = kl_sum / est.panels.len() as f64;
        let distance = copula_distance(&est, &truth)?;
        let correlations = pearson_matrix(&adjusted);
        rows.push(CopulaTraceRow { iteration, kl, distance, correlations });
        estimate = Some(est);
    }
    Ok(CopulaLearnOutcome { rows, estimate: estimate.expect("at least one iteration"), truth })
}

// ---------------------------------------------------------------------------
// Attenuation analysis
// ---------------------------------------------------------------------------

/// Influence of the earliest input on the accumulator after m inputs have
/// been folded in: the analytic factor Π_{k<m} w_k alongside the value
/// measured on the simulated cascade.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttenuationRow {
    pub m: usize,
    pub analytic: f64,
    pub measured: f64,
}

/// First-input attenuation series for a uniform-weight cascade: for each
/// prefix length m the analytic factor is the literal product of the m−1
/// block weights (w^{m−1} for uniform w), and the measured value is the
/// exact accumulator response Δ⟨Z₀⟩/2 to flipping the first input on the
/// simulated circuit. The recursion is linear in each input, so the
/// response is independent of the remaining inputs.
pub fn run_attenuation_analysis(cfg: &CorrelationExperimentConfig) -> Result<Vec<AttenuationRow>> {
    cfg.validate()?;
    let w = cfg.weight;
    let mut rows = Vec::with_capacity(cfg.n_qubits);
    for m in 1..=cfg.n_qubits {
        let analytic = (1..m).fold(1.0f64, |acc, _| acc * w);
        let measured = if m == 1 {
            1.0
        } else {
            let gates = cascade_gates(&vec![w; m - 1])?;
            let mut plus = StateVector::basis_state(m, 0)?;
            plus.apply_circuit(&gates)?;
            let mut minus = StateVector::basis_state(m, 1)?;
            minus.apply_circuit(&gates)?;
            (plus.expectation_z(0) - minus.expectation_z(0)) / 2.0
        };
        rows.push(AttenuationRow { m, analytic, measured });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Variance analysis
// ---------------------------------------------------------------------------

/// One swept weight: binomial prediction w(1−w)·n/4 against the sample
/// variance measured on the simulated weight register, with the standard
/// error of that variance estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceRow {
    pub weight: f64,
    pub predicted: f64,
    pub measured: f64,
    pub std_error: f64,
}

/// Variance rows plus the scaling convention they were recorded under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceOutcome {
    pub rows: Vec<VarianceRow>,
    /// Human-readable statement of the statistic's normalization.
    pub scaling: String,
}

fn sample_variance_with_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let m = stats::mean(values);
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
    let m4 = values.iter().map(|v| (v - m).powi(4)).sum::<f64>() / n;
    let se2 = (m4 - var * var * (n - 3.0) / (n - 1.0)) / n;
    (var, se2.max(0.0).sqrt())
}

/// Sweep the block weight over 0, 0.1, …, 1 and compare the measured
/// variance of the scaled statistic n·s against the prediction w(1−w)·n/4.
///
/// Realization: each of the n blocks prepares its weight qubit at the
/// weight angle α = arccos(1−2w) and measures it, giving an independent
/// Bernoulli(w) bit per block — the symmetric ±1 data marginals leave the
/// weight register unbiased. The recorded statistic is n·s = (half-count of
/// ones), i.e. s is the per-block mean half-indicator; under that scaling
/// Var(n·s) = w(1−w)·n/4 exactly. The convention is restated in the
/// outcome's `scaling` field.
pub fn run_variance_analysis(
    cfg: &CorrelationExperimentConfig,
    rng: &RngStream,
) -> Result<VarianceOutcome> {
    cfg.validate()?;
    let n = cfg.n_qubits;
    let sweep: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    let results: Vec<Result<VarianceRow>> = thread::scope(|scope| {
        let handles: Vec<_> = sweep
            .iter()
            .enumerate()
            .map(|(wi, &w)| {
                let mut stream = rng.child(wi as u64);
                let samples = cfg.samples;
                scope.spawn(move || -> Result<VarianceRow> {
                    let alpha = (1.0 - 2.0 * w).clamp(-1.0, 1.0).acos();
                    let mut state = StateVector::zero_state(n)?;
                    for q in 0..n {
                        state.apply_gate(&GateOp::Ry { q, theta: alpha })?;
                    }
                    let set = state.sample_bitstrings(samples, &mut stream)?;
                    let mut values = Vec::with_capacity(samples as usize);
                    for (&bits, &count) in set.counts() {
                        let half_count = bits.count_ones() as f64 / 2.0;
                        values.extend(std::iter::repeat(half_count).take(count as usize));
                    }
                    let (measured, std_error) = sample_variance_with_se(&values);
                    let predicted = w * (1.0 - w) * n as f64 / 4.0;
                    Ok(VarianceRow { weight: w, predicted, measured, std_error })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::numeric("variance worker panicked"))))
            .collect()
    });
    let rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    let scaling = format!(
        "n*s is half the count of ones across the {n}-block weight register; \
         s is the per-block mean half-indicator, so Var(n*s) = w(1-w)*n/4"
    );
    Ok(VarianceOutcome { rows, scaling })
}

// ---------------------------------------------------------------------------
// Depth decay
// ---------------------------------------------------------------------------

/// Mean input-output correlation at one (retention fraction, depth) cell,
/// with the spread across independent trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthDecayRow {
    pub xi: f64,
    pub depth: usize,
    pub correlation: f64,
    pub spread: f64,
}

/// Exponential-decay fit of one retention fraction's correlation curve:
/// rate is −slope of ln(correlation) against depth, with a 95% half-width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub xi: f64,
    pub rate: f64,
    pub rate_half_width: f64,
    pub points_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthDecayOutcome {
    pub rows: Vec<DepthDecayRow>,
    pub fits: Vec<DecayFit>,
}

fn depth_decay_cell(
    n: usize,
    samples: u64,
    trials: u64,
    xi: f64,
    depth: usize,
    base: RngStream,
) -> Result<(f64, f64)> {
    let mut per_trial = Vec::with_capacity(trials as usize);
    for t in 0..trials {
        let mut stream = base.child(t);
        // One random circuit per trial: every layer rotates each qubit by
        // small random angles, then keeps its CX brickwork with
        // probability xi (the retention fraction of entangling layers).
        let mut gates = Vec::new();
        for layer in 0..depth {
            for q in 0..n {
                gates.push(GateOp::Ry { q, theta: stream.normal(0.0, DECAY_LAYER_SIGMA) });
                gates.push(GateOp::Rz { q, theta: stream.normal(0.0, DECAY_LAYER_SIGMA) });
            }
            if stream.uniform() < xi {
                let mut q = layer % 2;
                while q + 1 < n {
                    gates.push(GateOp::Cx { control: q, target: q + 1 });
                    q += 2;
                }
            }
        }
        let mut ins = vec![Vec::with_capacity(samples as usize); n];
        let mut outs = vec![Vec::with_capacity(samples as usize); n];
        for _ in 0..samples {
            let mut bits = 0u64;
            for q in 0..n {
                if stream.bernoulli(0.5) {
                    bits |= 1 << q;
                }
            }
            let mut sv = StateVector::basis_state(n, bits)?;
            sv.apply_circuit(&gates)?;
            for q in 0..n {
                ins[q].push(1.0 - 2.0 * ((bits >> q) & 1) as f64);
                outs[q].push(sv.expectation_z(q));
            }
        }
        let mut acc = 0.0;
        for q in 0..n {
            let r = stats::pearson(&ins[q], &outs[q]);
            if !r.is_finite() {
                return Err(Error::numeric(format!(
                    "zero-variance observable on qubit {q} at depth {depth}"
                )));
            }
            acc += r;
        }
        per_trial.push(acc / n as f64);
    }
    let mean = stats::mean(&per_trial);
    let spread = if per_trial.len() < 2 { 0.0 } else { stats::sample_std(&per_trial) };
    Ok((mean, spread))
}

/// Input-output correlation decay under random layered circuits appended to
/// the basis-state encoder.
///
/// For each retention fraction ξ ∈ {0, ξ_max/2, ξ_max} and each depth, one
/// random circuit per trial is applied to `samples` random ±1 basis inputs;
/// the cell's correlation is the qubit-averaged Pearson correlation between
/// the classical inputs and the exact ⟨Z⟩ readouts, averaged over trials.
/// Per fraction, an exponential decay rate is fitted to ln(correlation)
/// against depth over the points above the noise floor.
pub fn run_depth_decay(cfg: &CorrelationExperimentConfig, rng: &RngStream) -> Result<DepthDecayOutcome> {
    cfg.validate()?;
    if cfg.depth_sweep.is_empty() {
        return Err(Error::invalid("depth sweep must be nonempty"));
    }
    let mut xis = vec![0.0];
    for cand in [cfg.xi / 2.0, cfg.xi] {
        if cand > xis.last().unwrap() + 1e-12 {
            xis.push(cand);
        }
    }
    let n = cfg.n_qubits;
    let cells: Vec<(usize, usize)> = (0..xis.len())
        .flat_map(|xi_idx| (0..cfg.depth_sweep.len()).map(move |d_idx| (xi_idx, d_idx)))
        .collect();
    let results: Vec<Result<(f64, f64)>> = thread::scope(|scope| {
        let handles: Vec<_> = cells
            .iter()
            .map(|&(xi_idx, d_idx)| {
                let xi = xis[xi_idx];
                let depth = cfg.depth_sweep[d_idx];
                let base = rng.child(((xi_idx as u64) << 32) | d_idx as u64);
                let (samples, trials) = (cfg.samples, cfg.trials);
                scope.spawn(move || depth_decay_cell(n, samples, trials, xi, depth, base))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::numeric("depth-decay worker panicked"))))
            .collect()
    });
    let mut rows = Vec::with_capacity(cells.len());
    for (&(xi_idx, d_idx), cell) in cells.iter().zip(results) {
        let (correlation, spread) = cell?;
        rows.push(DepthDecayRow { xi: xis[xi_idx], depth: cfg.depth_sweep[d_idx], correlation, spread });
    }
    let mut fits = Vec::new();
    for (xi_idx, &xi) in xis.iter().enumerate() {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| {
                (r.xi - xi).abs() < 1e-12 && r.correlation > FIT_FLOOR
            })
            .map(|r| (r.depth as f64, r.correlation.ln()))
            .collect();
        if pts.len() < 2 {
            continue;
        }
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let (a, b) = stats::linear_fit(&xs, &ys);
        let k = pts.len();
        let half_width = if k > 2 {
            let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - a - b * x).powi(2)).sum();
            let mx = stats::mean(&xs);
            let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
            1.96 * (ss_res / (k as f64 - 2.0) / sxx).sqrt()
        } else {
            f64::INFINITY
        };
        let _ = xi_idx;
        fits.push(DecayFit { xi, rate: -b, rate_half_width: half_width, points_used: k });
    }
    Ok(DepthDecayOutcome { rows, fits })
}

// ---------------------------------------------------------------------------
// Benchmark
// ---------------------------------------------------------------------------

/// Benchmark knobs: seeds per size, walk-reweighting strength, and the
/// optimizer budget shared by every seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkConfig {
    /// Independent synthetic instances per problem size.
    pub seeds: u64,
    /// Strength of the alignment kernel exp(−κ·(y − y*)²) that reweights
    /// the optimized sampling distribution.
    pub kappa: f64,
    pub optimizer: OptimizerConfig,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig { seeds: 20, kappa: 4.0, optimizer: OptimizerConfig::default() }
    }
}

/// Approximation ratios of one synthetic instance under min-max
/// normalization: 1 is the exact optimum, 0 the worst assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRatio {
    pub n: usize,
    pub seed: u64,
    pub qaoa: f64,
    pub qawa: f64,
    pub uniform: f64,
}

/// One aggregated table row: mean ± std of a method's ratio at one size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub n: usize,
    pub method: String,
    pub mean: f64,
    pub std: f64,
    pub seeds: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkOutcome {
    pub per_seed: Vec<SeedRatio>,
    pub rows: Vec<BenchmarkRow>,
}

fn benchmark_seed(n: usize, p: usize, cfg: &BenchmarkConfig, stream: RngStream, seed: u64) -> Result<SeedRatio> {
    let mut r_problem = stream.child(0);
    let spec = PortfolioSpec::synthetic(n, &mut r_problem)?;
    let ising = qubo_to_ising(&build_portfolio_qubo(&spec)?)?;
    let table = eigen_energy_table(&ising, n)?;
    let e_min = table.iter().cloned().fold(f64::INFINITY, f64::min);
    let e_max = table.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = e_max - e_min;
    if span <= 1e-12 * (1.0 + e_max.abs()) {
        return Ok(SeedRatio { n, seed, qaoa: 1.0, qawa: 1.0, uniform: 1.0 });
    }
    let ratio = |e: f64| (e_max - e) / span;

    let mut r_opt = stream.child(1);
    let (params, _trace) = optimize_params(&ising, p, &cfg.optimizer, &mut r_opt)?;
    let state = prepare_qaoa_state(&ising, &params)?;
    let e_qaoa = energy_expectation(&state, &ising)?;

    let e_uniform = table.iter().sum::<f64>() / table.len() as f64;

    // Walk reweighting: flip measured bits so the exhaustive-search optimum
    // encodes to all +1 (the same argmin and tie-break the target resolver
    // uses), read every basis state through the learned-branch cascade, and
    // concentrate the optimized distribution around readouts matching the
    // alignment target.
    let decision_table = ising.energy_table();
    let best_decision = decision_table
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
        .map(|(i, _)| i as u64)
        .unwrap_or(0);
    let best_measured = !best_decision & ((1u64 << n) - 1);
    let mask: Vec<bool> = (0..n).map(|i| (best_measured >> i) & 1 == 1).collect();
    let mut oracle = QawaOracle::new(
        ising.clone(),
        params.clone(),
        ActivationEncoder::default(),
        vec![1.0; n - 1],
        vec![0.5; n - 1],
        FRAC_PI_2,
        mask,
    )?;
    oracle.set_learned_coefficients(&vec![1.0 / n as f64; n])?;
    let resolved = resolve_target(&oracle, &TargetSpec::brute_force_alignment())?;
    let y_star = match resolved.y_target {
        TargetValue::Scalar(v) => v,
        TargetValue::PerSample(_) => return Err(Error::invalid("alignment target must be scalar")),
    };
    let mask_bits = best_measured;
    let mut weighted_total = 0.0;
    let mut weighted_energy = 0.0;
    for (idx, amp) in state.amplitudes().iter().enumerate() {
        let p0 = amp.norm_sqr();
        if p0 <= 0.0 {
            continue;
        }
        let encoded = (idx as u64) ^ mask_bits;
        let xs: Vec<f64> = (0..n).map(|i| 1.0 - 2.0 * ((encoded >> i) & 1) as f64).collect();
        let s = classical_branch_mixture(&oracle, &xs)?;
        let y = oracle.encoder.activated_value(s * oracle.encoder.scale_a)?.0;
        let kernel = (-cfg.kappa * (y - y_star) * (y - y_star)).exp();
        weighted_total += p0 * kernel;
        weighted_energy += p0 * kernel * table[idx];
    }
    let e_qawa = if weighted_total > 0.0 { weighted_energy / weighted_total } else { e_qaoa };

    Ok(SeedRatio { n, seed, qaoa: ratio(e_qaoa), qawa: ratio(e_qawa), uniform: ratio(e_uniform) })
}

/// Benchmark the optimized sampler against its walk-reweighted refinement
/// and the exhaustive optimum on synthetic portfolio instances.
///
/// Every (size, seed) cell runs in its own thread on a stream derived from
/// the cell's indices, and cells are aggregated in (size, seed) order, so
/// the outcome is independent of scheduling. Ratios use min-max
/// normalization over the exact energy table: the exhaustive optimum scores
/// 1, and uniform sampling lands near ½ on typical instances.
pub fn run_benchmark(
    sizes: &[usize],
    p: usize,
    cfg: &BenchmarkConfig,
    rng: &RngStream,
) -> Result<BenchmarkOutcome> {
    if sizes.is_empty() {
        return Err(Error::invalid("need at least one problem size"));
    }
    for &n in sizes {
        if n > 20 {
            return Err(Error::invalid(format!("oversized instance: n={n} exceeds the exhaustive limit 20")));
        }
        if n < 2 {
            return Err(Error::invalid("problem sizes must be at least 2"));
        }
    }
    if p == 0 {
        return Err(Error::invalid("need at least one walk layer"));
    }
    if cfg.seeds == 0 {
        return Err(Error::invalid("need at least one seed"));
    }
    if !cfg.kappa.is_finite() || cfg.kappa < 0.0 {
        return Err(Error::invalid("reweighting strength must be finite and nonnegative"));
    }
    let tasks: Vec<(usize, usize, u64)> = sizes
        .iter()
        .enumerate()
        .flat_map(|(ni, &n)| (0..cfg.seeds).map(move |s| (ni, n, s)))
        .collect();
    let results: Vec<Result<SeedRatio>> = thread::scope(|scope| {
        let handles: Vec<_> = tasks
            .iter()
            .map(|&(ni, n, s)| {
                let stream = rng.child(((ni as u64) << 32) | s);
                scope.spawn(move || benchmark_seed(n, p, cfg, stream, s))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::numeric("benchmark worker panicked"))))
            .collect()
    });
    let per_seed = results.into_iter().collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(sizes.len() * 4);
    for &n in sizes {
        let of_size: Vec<&SeedRatio> = per_seed.iter().filter(|r| r.n == n).collect();
        let columns: [(&str, Vec<f64>); 4] = [
            ("qaoa", of_size.iter().map(|r| r.qaoa).collect()),
            ("qawa", of_size.iter().map(|r| r.qawa).collect()),
            ("exact", of_size.iter().map(|_| 1.0).collect()),
            ("uniform", of_size.iter().map(|r| r.uniform).collect()),
        ];
        for (method, vals) in columns {
            let mean = stats::mean(&vals);
            let std = if vals.len() < 2 { 0.0 } else { stats::sample_std(&vals) };
            rows.push(BenchmarkRow { n, method: method.to_string(), mean, std, seeds: vals.len() as u64 });
        }
    }
    Ok(BenchmarkOutcome { per_seed, rows })
}

// ---------------------------------------------------------------------------
// CSV emitters
// ---------------------------------------------------------------------------

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Stable 64-bit hash of a configuration's canonical JSON encoding, used to
/// stamp emitted artifacts with the settings that produced them.
pub fn config_hash<T: Serialize>(cfg: &T) -> Result<String> {
    let bytes = serde_json::to_vec(cfg)
        .map_err(|e| Error::invalid(format!("configuration did not serialize: {e}")))?;
    Ok(format!("{:016x}", fnv1a64(&bytes)))
}

fn csv_header<T: Serialize>(cfg: &T, seed: u64) -> Result<String> {
    Ok(format!("# config {} seed {}\n", config_hash(cfg)?, seed))
}

/// `iter,kl,distance` rows of the learning-curve trace.
pub fn copula_trace_csv(cfg: &CopulaLearnConfig, seed: u64, rows: &[CopulaTraceRow]) -> Result<String> {
    let mut out = csv_header(cfg, seed)?;
    out.push_str("iter,kl,distance\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.iteration, r.kl, r.distance);
    }
    Ok(out)
}

/// `m,analytic,measured` rows of the attenuation series.
pub fn attenuation_csv(cfg: &CorrelationExperimentConfig, seed: u64, rows: &[AttenuationRow]) -> Result<String> {
    let mut out = csv_header(cfg, seed)?;
    out.push_str("m,analytic,measured\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.m, r.analytic, r.measured);
    }
    Ok(out)
}

/// `weight,predicted,measured,std_error` rows of the variance sweep; the
/// scaling convention rides along as a second header comment.
pub fn variance_csv(cfg: &CorrelationExperimentConfig, seed: u64, outcome: &VarianceOutcome) -> Result<String> {
    let mut out = csv_header(cfg, seed)?;
    let _ = writeln!(out, "# scaling {}", outcome.scaling);
    out.push_str("weight,predicted,measured,std_error\n");
    for r in &outcome.rows {
        let _ = writeln!(out, "{},{},{},{}", r.weight, r.predicted, r.measured, r.std_error);
    }
    Ok(out)
}

/// `xi,depth,correlation,spread` rows of the decay surface.
pub fn depth_decay_csv(cfg: &CorrelationExperimentConfig, seed: u64, outcome: &DepthDecayOutcome) -> Result<String> {
    let mut out = csv_header(cfg, seed)?;
    out.push_str("xi,depth,correlation,spread\n");
    for r in &outcome.rows {
        let _ = writeln!(out, "{},{},{},{}", r.xi, r.depth, r.correlation, r.spread);
    }
    Ok(out)
}

/// `n,method,mean,std,seeds` rows of the aggregated benchmark table.
pub fn benchmark_csv(p: usize, cfg: &BenchmarkConfig, seed: u64, rows: &[BenchmarkRow]) -> Result<String> {
    let tagged = serde_json::json!({ "p": p, "benchmark": cfg });
    let mut out = csv_header(&tagged, seed)?;
    out.push_str("n,method,mean,std,seeds\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.n, r.method, r.mean, r.std, r.seeds);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_corr_cfg() -> CorrelationExperimentConfig {
        CorrelationExperimentConfig {
            n_qubits: 4,
            samples: 300,
            trials: 3,
            weight: 0.5,
            xi: 1.0,
            depth_sweep: vec![0, 2, 4],
        }
    }

    #[test]
    fn attenuation_series_is_the_weight_power() {
        let mut cfg = CorrelationExperimentConfig { n_qubits: 6, ..Default::default() };
        cfg.weight = 1.0;
        for row in run_attenuation_analysis(&cfg).unwrap() {
            assert_eq!(row.analytic, 1.0);
            assert!((row.measured - 1.0).abs() < 1e-12, "m={}: {}", row.m, row.measured);
        }
        cfg.weight = 0.5;
        let rows = run_attenuation_analysis(&cfg).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[3].m, 4);
        assert!((rows[3].analytic - 0.125).abs() < 1e-15);
        for row in &rows {
            assert!(
                (row.measured - row.analytic).abs() < 1e-12,
                "m={}: circuit {} vs analytic {}",
                row.m,
                row.measured,
                row.analytic
            );
            assert!((row.analytic - cfg.weight.powi(row.m as i32 - 1)).abs() < 1e-15);
        }
        cfg.weight = 0.0;
        let rows = run_attenuation_analysis(&cfg).unwrap();
        assert_eq!(rows[0].analytic, 1.0);
        assert!(rows[1..].iter().all(|r| r.analytic == 0.0 && r.measured.abs() < 1e-12));
    }

    #[test]
    fn first_input_influence_ignores_the_other_inputs() {
        // The response to flipping the first input is the same for every
        // setting of the remaining inputs (the recursion is linear), so the
        // trial mean trivially sits within two standard errors of the
        // analytic factor — and each individual trial matches it exactly.
        let w = 0.7;
        let m = 5;
        let gates = cascade_gates(&vec![w; m - 1]).unwrap();
        let analytic = w.powi(m as i32 - 1);
        let mut rng = RngStream::from_seed(910);
        let mut deltas = Vec::new();
        for _ in 0..8 {
            let tail = rng.below(1 << (m - 1)) << 1;
            let mut plus = StateVector::basis_state(m, tail).unwrap();
            plus.apply_circuit(&gates).unwrap();
            let mut minus = StateVector::basis_state(m, tail | 1).unwrap();
            minus.apply_circuit(&gates).unwrap();
            let delta = (plus.expectation_z(0) - minus.expectation_z(0)) / 2.0;
            assert!((delta - analytic).abs() < 1e-10, "tail {tail:b}: {delta} vs {analytic}");
            deltas.push(delta);
        }
        let mean = stats::mean(&deltas);
        let se = stats::sample_std(&deltas) / (deltas.len() as f64).sqrt();
        assert!((mean - analytic).abs() <= 2.0 * se + 1e-9);
    }

    #[test]
    fn variance_tracks_the_binomial_prediction() {
        let cfg = CorrelationExperimentConfig { samples: 4000, ..Default::default() };
        let out = run_variance_analysis(&cfg, &RngStream::from_seed(911)).unwrap();
        assert_eq!(out.rows.len(), 11);
        for row in &out.rows {
            if row.weight == 0.0 || row.weight == 1.0 {
                assert_eq!(row.predicted, 0.0);
                assert_eq!(row.measured, 0.0, "deterministic register at w={}", row.weight);
                continue;
            }
            assert!(
                (row.measured - row.predicted).abs() <= 3.0 * row.std_error + 1e-12,
                "w={}: measured {} vs predicted {} (se {})",
                row.weight,
                row.measured,
                row.predicted,
                row.std_error
            );
        }
        let at = |w: f64| out.rows.iter().find(|r| (r.weight - w).abs() < 1e-9).unwrap().predicted;
        assert!((at(0.5) - 0.5).abs() < 1e-15); // 0.5·0.5·8/4
        assert!((at(0.3) - at(0.7)).abs() < 1e-12);
    }

    #[test]
    fn variance_scaling_is_stated_in_the_metadata() {
        let cfg = CorrelationExperimentConfig { samples: 16, ..Default::default() };
        let out = run_variance_analysis(&cfg, &RngStream::from_seed(912)).unwrap();
        assert!(out.scaling.contains("w(1-w)*n/4"));
        let csv = variance_csv(&cfg, 912, &out).unwrap();
        assert!(csv.lines().nth(1).unwrap().starts_with("# scaling "));
    }

    #[test]
    fn zero_depth_keeps_the_inputs_perfectly_correlated() {
        let cfg = small_corr_cfg();
        let out = run_depth_decay(&cfg, &RngStream::from_seed(913)).unwrap();
        for row in out.rows.iter().filter(|r| r.depth == 0) {
            assert!((row.correlation - 1.0).abs() < 1e-9, "xi={}: {}", row.xi, row.correlation);
            assert!(row.spread < 1e-9);
        }
    }

    #[test]
    fn correlations_decay_with_depth_and_stay_bounded() {
        let cfg = CorrelationExperimentConfig {
            n_qubits: 5,
            samples: 400,
            trials: 3,
            depth_sweep: vec![0, 2, 4, 6],
            ..Default::default()
        };
        let out = run_depth_decay(&cfg, &RngStream::from_seed(914)).unwrap();
        assert_eq!(out.rows.len(), 3 * 4); // ξ ∈ {0, ½, 1} × four depths
        for row in &out.rows {
            assert!(row.correlation.abs() <= 1.0 + 1e-12);
        }
        for &xi in &[0.5, 1.0] {
            let first = out.rows.iter().find(|r| (r.xi - xi).abs() < 1e-12 && r.depth == 0).unwrap();
            let last = out.rows.iter().find(|r| (r.xi - xi).abs() < 1e-12 && r.depth == 6).unwrap();
            assert!(
                last.correlation < first.correlation,
                "xi={xi}: no decay ({} -> {})",
                first.correlation,
                last.correlation
            );
            let fit = out.fits.iter().find(|f| (f.xi - xi).abs() < 1e-12).unwrap();
            assert!(fit.rate > 0.0, "xi={xi}: fitted rate {}", fit.rate);
            assert!(fit.points_used >= 2);
        }
    }

    #[test]
    fn copula_learning_converges_and_recovers_the_signs() {
        let cfg = CopulaLearnConfig { iterations: 60, batch: 500, grid: 10, ..Default::default() };
        let out = run_copula_experiment(&cfg, &RngStream::from_seed(915)).unwrap();
        assert_eq!(out.rows.len(), 60);
        let first_kl = out.rows[0].kl;
        let final_kl = out.rows.last().unwrap().kl;
        assert!(first_kl > final_kl, "no improvement: {first_kl} -> {final_kl}");
        // Best-so-far trace is monotone and ends below the convergence bar.
        let mut best = f64::INFINITY;
        for row in &out.rows {
            best = best.min(row.kl);
        }
        assert!((best - final_kl).abs() < 1e-6 || best <= final_kl);
        assert!(final_kl < 0.02, "final divergence {final_kl}");
        assert!(out.rows.last().unwrap().distance < 0.05);
        let c = &out.rows.last().unwrap().correlations;
        assert!(c[0][1] > 0.5 && c[2][3] > 0.5, "intra pairs lost: {} {}", c[0][1], c[2][3]);
        for &(i, j) in &[(0usize, 3usize), (1, 2), (0, 2), (1, 3)] {
            assert!(c[i][j] < -0.05, "cross pair ({i},{j}) not negative: {}", c[i][j]);
        }
        out.estimate.verify_axioms().unwrap();
        out.truth.verify_axioms().unwrap();
    }

    #[test]
    fn benchmark_reweighting_dominates_the_plain_sampler() {
        let cfg = BenchmarkConfig { seeds: 20, ..Default::default() };
        let out = run_benchmark(&[4], 3, &cfg, &RngStream::from_seed(916)).unwrap();
        assert_eq!(out.per_seed.len(), 20);
        let mut dominated = 0;
        for r in &out.per_seed {
            assert!((0.0..=1.0 + 1e-9).contains(&r.qaoa));
            assert!((0.0..=1.0 + 1e-9).contains(&r.qawa));
            if r.qawa >= r.qaoa {
                dominated += 1;
            }
        }
        assert!(dominated >= 16, "reweighting won only {dominated}/20 seeds");
        let exact = out.rows.iter().find(|r| r.method == "exact").unwrap();
        assert_eq!(exact.mean, 1.0);
        assert_eq!(exact.std, 0.0);
        let uniform = out.rows.iter().find(|r| r.method == "uniform").unwrap();
        assert!(
            (0.3..0.7).contains(&uniform.mean),
            "uniform baseline {} is far from the min-max midpoint",
            uniform.mean
        );
    }

    #[test]
    fn benchmark_difficulty_grows_with_size() {
        let cfg = BenchmarkConfig { seeds: 8, ..Default::default() };
        let out = run_benchmark(&[4, 6, 8], 2, &cfg, &RngStream::from_seed(917)).unwrap();
        let mean_of = |n: usize, method: &str| {
            out.rows.iter().find(|r| r.n == n && r.method == method).unwrap().mean
        };
        for method in ["qaoa", "qawa"] {
            let (m4, m8) = (mean_of(4, method), mean_of(8, method));
            assert!(
                m8 <= m4 + 0.05,
                "{method}: size-8 mean {m8} above size-4 mean {m4}"
            );
        }
    }

    #[test]
    fn benchmark_rejects_bad_inputs() {
        let cfg = BenchmarkConfig { seeds: 1, ..Default::default() };
        let rng = RngStream::from_seed(918);
        assert!(run_benchmark(&[21], 1, &cfg, &rng).is_err());
        assert!(run_benchmark(&[1], 1, &cfg, &rng).is_err());
        assert!(run_benchmark(&[], 1, &cfg, &rng).is_err());
        assert!(run_benchmark(&[4], 0, &cfg, &rng).is_err());
        let bad = BenchmarkConfig { kappa: f64::NAN, ..Default::default() };
        assert!(run_benchmark(&[4], 1, &bad, &rng).is_err());
    }

    #[test]
    fn experiments_replay_bit_for_bit_under_a_fixed_seed() {
        let corr = small_corr_cfg();
        let v1 = run_variance_analysis(&corr, &RngStream::from_seed(919)).unwrap();
        let v2 = run_variance_analysis(&corr, &RngStream::from_seed(919)).unwrap();
        assert_eq!(v1, v2);
        let v3 = run_variance_analysis(&corr, &RngStream::from_seed(920)).unwrap();
        assert_ne!(v1.rows, v3.rows, "different seeds must differ somewhere");

        let d1 = run_depth_decay(&corr, &RngStream::from_seed(921)).unwrap();
        let d2 = run_depth_decay(&corr, &RngStream::from_seed(921)).unwrap();
        assert_eq!(d1, d2);

        let bench = BenchmarkConfig { seeds: 2, ..Default::default() };
        let b1 = run_benchmark(&[3, 4], 1, &bench, &RngStream::from_seed(922)).unwrap();
        let b2 = run_benchmark(&[3, 4], 1, &bench, &RngStream::from_seed(922)).unwrap();
        assert_eq!(b1, b2);

        let learn = CopulaLearnConfig { iterations: 4, batch: 60, grid: 6, ..Default::default() };
        let c1 = run_copula_experiment(&learn, &RngStream::from_seed(923)).unwrap();
        let c2 = run_copula_experiment(&learn, &RngStream::from_seed(923)).unwrap();
        assert_eq!(c1, c2);
    }

    #[test]
    fn csv_headers_carry_the_config_hash_and_seed() {
        let corr = small_corr_cfg();
        let rows = run_attenuation_analysis(&corr).unwrap();
        let csv = attenuation_csv(&corr, 42, &rows).unwrap();
        let mut lines = csv.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("# config "));
        assert!(header.ends_with(" seed 42"));
        assert_eq!(lines.next().unwrap(), "m,analytic,measured");
        assert_eq!(csv.lines().count(), 2 + rows.len());

        // Different settings hash differently; identical settings agree.
        let other = CorrelationExperimentConfig { weight: 0.25, ..corr.clone() };
        assert_ne!(config_hash(&corr).unwrap(), config_hash(&other).unwrap());
        assert_eq!(config_hash(&corr).unwrap(), config_hash(&corr.clone()).unwrap());

        let learn = CopulaLearnConfig { iterations: 2, batch: 40, grid: 6, ..Default::default() };
        let out = run_copula_experiment(&learn, &RngStream::from_seed(924)).unwrap();
        let trace = copula_trace_csv(&learn, 7, &out.rows).unwrap();
        assert!(trace.lines().next().unwrap().contains(" seed 7"));
        assert_eq!(trace.lines().nth(1).unwrap(), "iter,kl,distance");
        let fields: Vec<&str> = trace.lines().nth(2).unwrap().split(',').collect();
        assert_eq!(fields[0], "1");
        assert!(fields[1].parse::<f64>().unwrap() > 0.0);

        let bench_rows = vec![BenchmarkRow { n: 4, method: "exact".into(), mean: 1.0, std: 0.0, seeds: 20 }];
        let bcsv = benchmark_csv(3, &BenchmarkConfig::default(), 5, &bench_rows).unwrap();
        assert_eq!(bcsv.lines().nth(1).unwrap(), "n,method,mean,std,seeds");
        assert_eq!(bcsv.lines().nth(2).unwrap(), "4,exact,1,0,20");
    }

    #[test]
    fn configs_validate_their_ranges() {
        let mut cfg = CorrelationExperimentConfig::default();
        cfg.samples = 1;
        assert!(cfg.validate().is_err());
        cfg = CorrelationExperimentConfig { weight: 1.5, ..Default::default() };
        assert!(cfg.validate().is_err());
        cfg = CorrelationExperimentConfig { n_qubits: 21, ..Default::default() };
        assert!(cfg.validate().is_err());
        cfg = CorrelationExperimentConfig { xi: -0.1, ..Default::default() };
        assert!(cfg.validate().is_err());
        cfg = CorrelationExperimentConfig { depth_sweep: vec![], ..Default::default() };
        assert!(run_depth_decay(&cfg, &RngStream::from_seed(1)).is_err());

        let mut learn = CopulaLearnConfig::default();
        learn.sign_mask = vec![false; 3];
        assert!(learn.validate().is_err());
        learn = CopulaLearnConfig { rho_intra: 1.0, ..Default::default() };
        assert!(learn.validate().is_err());
        learn = CopulaLearnConfig { grid: 1, ..Default::default() };
        assert!(learn.validate().is_err());
    }
}
