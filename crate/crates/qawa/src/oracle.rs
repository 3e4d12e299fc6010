//! The assembled walk oracle: a QAOA sampler feeding a coin-controlled
//! weighted-sum cascade through mid-circuit measurement, plus the gradient
//! machinery that trains the cascade against a target statistic.
//!
//! Forward pass, per shot: prepare the QAOA state, measure every data qubit,
//! re-encode the outcomes as a computational basis state (an X wherever the
//! sign mask flags a negatively-oriented input), attach a coin ancilla
//! rotated by Ry(2θ), apply the primary-branch cascade anti-controlled on
//! the coin and the alternate-branch cascade controlled on it, and read the
//! accumulator ⟨Z₀⟩ through the activation.
//!
//! Measuring before re-encoding is what keeps the cascade algebra exact:
//! each input qubit enters its block in a computational basis state, so the
//! purely imaginary off-diagonal of the conjugated readout operator never
//! contributes and the circuit value equals the classical recursion
//! shot-for-shot. With coherent inputs that equality would fail beyond the
//! first block, because the accumulator picks up complex amplitudes.
//!
//! The coin ancilla stays unmeasured, so the readout averages the two
//! branches with weights cos²θ and sin²θ. The primary branch defaults to
//! all-ones block weights, which commute with Z₀ and pass the first input
//! through untouched; learning then concentrates in the alternate branch.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::arith::{
    cascade_effective, cascade_invert, recursive_weighted_sum as rws, u_sum_matrix,
    ActivationEncoder,
};
use crate::error::{Error, Result};
use crate::problem::IsingModel;
use crate::qaoa::{prepare_qaoa_state, QaoaParams};
use crate::rng::RngStream;
use crate::sim::{draw_from_cumulative, pauli_x, ry, GateOp, SampleSet, StateVector, MAX_QUBITS};

pub use crate::arith::recursive_weighted_sum;

/// The full walk oracle: problem Hamiltonian, mixing-layer angles, outcome
/// encoder, the two cascade branches, the coin angle selecting between
/// them, and the sign-negation mask applied when re-encoding outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct QawaOracle {
    pub ising: IsingModel,
    pub qaoa_params: QaoaParams,
    pub encoder: ActivationEncoder,
    /// Block weights of the branch taken when the coin reads 0. All-ones
    /// leaves ⟨Z₀⟩ untouched (raw passthrough).
    pub weights: Vec<f64>,
    /// Block weights of the branch taken when the coin reads 1; this is the
    /// branch training updates.
    pub alt_weights: Vec<f64>,
    /// Coin amplitude angle in [0, π/2]: the coin is prepared as
    /// cos θ·|0⟩ + sin θ·|1⟩, so the alternate branch carries weight sin²θ.
    pub coin_theta: f64,
    /// Entry i true flips encoder qubit i, negating that input's sign.
    pub sign_mask: Vec<bool>,
}

impl QawaOracle {
    pub fn new(
        ising: IsingModel,
        qaoa_params: QaoaParams,
        encoder: ActivationEncoder,
        weights: Vec<f64>,
        alt_weights: Vec<f64>,
        coin_theta: f64,
        sign_mask: Vec<bool>,
    ) -> Result<Self> {
        let oracle = QawaOracle { ising, qaoa_params, encoder, weights, alt_weights, coin_theta, sign_mask };
        oracle.validate()?;
        Ok(oracle)
    }

    /// Oracle whose cascade stage is inert: both branches all-ones, coin at
    /// zero, no sign negation. Forward passes then report the activated
    /// first-qubit statistic of the bare QAOA distribution.
    pub fn passthrough(ising: IsingModel, qaoa_params: QaoaParams) -> Result<Self> {
        let n = ising.n();
        Self::new(
            ising,
            qaoa_params,
            ActivationEncoder::default(),
            vec![1.0; n.saturating_sub(1)],
            vec![1.0; n.saturating_sub(1)],
            0.0,
            vec![false; n],
        )
    }

    pub fn n_data_qubits(&self) -> usize {
        self.ising.n()
    }

    /// Point the alternate branch at the cascade realizing the given convex
    /// coefficients over the inputs.
    pub fn set_learned_coefficients(&mut self, coefficients: &[f64]) -> Result<()> {
        if coefficients.len() != self.n_data_qubits() {
            return Err(Error::invalid("coefficient count must match data qubits"));
        }
        self.alt_weights = cascade_invert(coefficients)?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.ising.n();
        if n == 0 {
            return Err(Error::invalid("oracle needs at least one data qubit"));
        }
        if n + 1 > MAX_QUBITS {
            return Err(Error::invalid(format!("{n} data qubits plus coin exceeds the register cap")));
        }
        if self.weights.len() != n - 1 || self.alt_weights.len() != n - 1 {
            return Err(Error::invalid(format!(
                "cascade needs {} block weights for {n} inputs (got {} and {})",
                n - 1,
                self.weights.len(),
                self.alt_weights.len()
            )));
        }
        for w in self.weights.iter().chain(&self.alt_weights) {
            if !(0.0..=1.0).contains(w) {
                return Err(Error::invalid(format!("block weight {w} outside [0,1]")));
            }
        }
        if !(0.0..=FRAC_PI_2).contains(&self.coin_theta) {
            return Err(Error::invalid(format!("coin angle {} outside [0, π/2]", self.coin_theta)));
        }
        if self.sign_mask.len() != n {
            return Err(Error::invalid("sign mask length must match data qubits"));
        }
        if self.encoder.scale_a <= 0.0 {
            return Err(Error::invalid("encoder scale must be positive"));
        }
        Ok(())
    }

    /// The sign mask as a basis-index XOR pattern.
    fn mask_bits(&self) -> u64 {
        self.sign_mask
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &f)| if f { acc | (1u64 << i) } else { acc })
    }
}

/// Everything one forward run produces: the mid-circuit measurement record,
/// the per-shot readout values, and the per-shot encoded inputs (±1 per
/// data qubit, sign mask applied).
#[derive(Debug, Clone)]
pub struct ForwardPass {
    pub samples: SampleSet,
    pub ys: Vec<f64>,
    pub xs: Vec<Vec<f64>>,
}

/// A training batch: encoded input vectors plus the activation they are
/// read through.
#[derive(Debug, Clone)]
pub struct Batch {
    pub xs: Vec<Vec<f64>>,
    pub encoder: ActivationEncoder,
}

impl Batch {
    pub fn new(xs: Vec<Vec<f64>>, encoder: ActivationEncoder) -> Result<Self> {
        let Some(first) = xs.first() else {
            return Err(Error::invalid("batch must contain at least one sample"));
        };
        if first.is_empty() || xs.iter().any(|x| x.len() != first.len()) {
            return Err(Error::invalid("batch samples must share a nonzero length"));
        }
        Ok(Batch { xs, encoder })
    }

    pub fn from_forward(fwd: &ForwardPass, encoder: &ActivationEncoder) -> Result<Self> {
        Self::new(fwd.xs.clone(), encoder.clone())
    }

    /// All 2^n sign patterns, one sample each, in basis-index order with
    /// bit i of the index mapped to x_i = 1 − 2·bit. Handy as a maximally
    /// informative design: the pattern matrix has orthogonal columns.
    pub fn full_enumeration(n: usize, encoder: &ActivationEncoder) -> Result<Self> {
        if n == 0 || n > 20 {
            return Err(Error::invalid("enumeration batch needs 1..=20 inputs"));
        }
        let xs = (0u64..1 << n)
            .map(|b| (0..n).map(|i| 1.0 - 2.0 * ((b >> i) & 1) as f64).collect())
            .collect();
        Self::new(xs, encoder.clone())
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.xs.first().map_or(0, Vec::len)
    }
}

/// Where a training target comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetSource {
    /// Activated weighted sum of the exhaustive-search optimum bitstring,
    /// computed when training starts.
    BruteForceAlignment,
    /// A pairwise-correlation statistic computed classically from the fitted
    /// dependence model; the caller supplies the number.
    ClassicalCopulaCorrelation,
    UserSupplied,
}

/// Scalar targets pin the batch mean; per-sample targets pin each readout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetValue {
    Scalar(f64),
    PerSample(Vec<f64>),
}

/// A training target and its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub y_target: TargetValue,
    pub source: TargetSource,
}

impl TargetSpec {
    pub fn scalar(value: f64, source: TargetSource) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::invalid("target value must be finite"));
        }
        Ok(TargetSpec { y_target: TargetValue::Scalar(value), source })
    }

    pub fn per_sample(values: Vec<f64>, source: TargetSource) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("per-sample targets must be nonempty and finite"));
        }
        Ok(TargetSpec { y_target: TargetValue::PerSample(values), source })
    }

    /// Placeholder spec whose value is filled in from the exhaustive-search
    /// optimum when training starts.
    pub fn brute_force_alignment() -> Self {
        TargetSpec { y_target: TargetValue::Scalar(0.0), source: TargetSource::BruteForceAlignment }
    }
}

/// How the coin angle is set after a training pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoinFunction {
    /// θ = clamp(α · mean encoded marginal, [0, π/2]): bounded, symmetric
    /// under input permutation, constant when the marginals are.
    MeanEncodedMarginals,
    /// Leave the configured coin angle alone.
    FixedPrior,
}

/// Gradient-descent knobs for the weight-training loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingConfig {
    pub eta: f64,
    pub iterations: usize,
    /// Shots drawn for the training batch when one is not supplied.
    pub shots: u64,
    /// Loss level that counts as converged.
    pub tolerance: f64,
    /// Scale α in the adaptive coin rule.
    pub alpha_coin: f64,
    pub coin_f: CoinFunction,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            eta: 0.1,
            iterations: 500,
            shots: 1024,
            tolerance: 1e-20,
            alpha_coin: FRAC_PI_2,
            coin_f: CoinFunction::MeanEncodedMarginals,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) {
            return Err(Error::invalid("learning rate must be positive"));
        }
        if self.shots == 0 {
            return Err(Error::invalid("training needs at least one shot"));
        }
        if self.tolerance < 0.0 || self.alpha_coin < 0.0 {
            return Err(Error::invalid("tolerance and coin scale must be nonnegative"));
        }
        Ok(())
    }
}

/// Loss and weight trajectory of one training run. `losses[t]` is the loss
/// at iteration t (index 0 = before the first step) and `weight_history[t]`
/// the matching coefficient vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    pub losses: Vec<f64>,
    pub weight_history: Vec<Vec<f64>>,
    pub converged_at: Option<usize>,
}

impl TrainingTrace {
    /// Running minimum of the loss sequence; nonincreasing by construction.
    pub fn best_so_far(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.losses
            .iter()
            .map(|&l| {
                best = best.min(l);
                best
            })
            .collect()
    }
}

/// Mean of per-shot readouts plus its standard error (sample std over √N).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

// ---------------------------------------------------------------------------
// Forward pass
// ---------------------------------------------------------------------------

/// Coin-controlled cascade over qubits 0..n with the coin on qubit `coin`:
/// every weighted-sum block fires only when the coin is |1⟩.
fn controlled_cascade(weights: &[f64], coin: usize) -> Result<Vec<GateOp>> {
    let mut gates = Vec::with_capacity(weights.len());
    for (k, &w) in weights.iter().enumerate() {
        gates.push(GateOp::ControlledTwoQubit { control: coin, m: u_sum_matrix(w)?, q_high: 0, q_low: k + 1 });
    }
    Ok(gates)
}

/// Circuit value of the readout for one encoded basis state: prepare
/// |x⟩|0⟩_coin, rotate the coin, run the primary branch anti-controlled and
/// the alternate branch controlled on it, return ⟨Z₀⟩.
pub fn coin_cascade_expectation(oracle: &QawaOracle, encoded_bits: u64) -> Result<f64> {
    let n = oracle.n_data_qubits();
    let coin = n;
    let mut sv = StateVector::basis_state(n + 1, encoded_bits)?;
    sv.apply_single(&ry(2.0 * oracle.coin_theta), coin)?;
    sv.apply_single(&pauli_x(), coin)?;
    sv.apply_circuit(&controlled_cascade(&oracle.weights, coin)?)?;
    sv.apply_single(&pauli_x(), coin)?;
    sv.apply_circuit(&controlled_cascade(&oracle.alt_weights, coin)?)?;
    Ok(sv.expectation_z(0))
}

/// Classical replay of [`coin_cascade_expectation`]: the coin-weighted
/// mixture of the two branch recursions on the encoded inputs.
pub fn classical_branch_mixture(oracle: &QawaOracle, xs: &[f64]) -> Result<f64> {
    let raw = rws(xs, &oracle.weights)?;
    let alt = rws(xs, &oracle.alt_weights)?;
    Ok(coin_mixture_expectation(oracle.coin_theta, raw, alt))
}

/// Activated readout for a pre-activation value, honoring the encoder's
/// clamp policy. Returns the value and its slope (zero where clamped, the
/// right derivative at the origin kink).
fn model_output(enc: &ActivationEncoder, s: f64) -> Result<(f64, f64)> {
    let u = s / enc.scale_a;
    let v = enc.activation(u);
    if !(-1.0..=1.0).contains(&v) {
        if !enc.clamp {
            return Err(Error::invalid(format!("activated value {v} outside the arccos domain and clamping is off")));
        }
        Ok((v.clamp(-1.0, 1.0), 0.0))
    } else {
        Ok((v, enc.activation_derivative(u) / enc.scale_a))
    }
}

/// Run the full per-shot pipeline: sample a mid-circuit outcome from the
/// QAOA state, apply the sign mask, push the resulting basis state through
/// the coin-controlled cascade, and activate the accumulator readout.
///
/// Shot j draws from the sub-stream `rng.child(j)`, so shots are
/// reproducible independently of evaluation order and a longer run extends
/// a shorter one sample-for-sample. The cascade stage is a deterministic
/// function of the measured bitstring, so its readout is memoized across
/// repeated outcomes; the readout itself is the exact branch-averaged
/// expectation, which is what the per-shot value is defined as — sampling
/// noise enters only through the mid-circuit measurement.
pub fn run_forward(oracle: &QawaOracle, shots: u64, rng: &RngStream) -> Result<ForwardPass> {
    oracle.validate()?;
    if shots == 0 {
        return Err(Error::invalid("forward pass needs at least one shot"));
    }
    let n = oracle.n_data_qubits();
    let state = prepare_qaoa_state(&oracle.ising, &oracle.qaoa_params)?;
    let cdf = state.cumulative_probabilities()?;
    let mask = oracle.mask_bits();

    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    let mut ys = Vec::with_capacity(shots as usize);
    let mut xs = Vec::with_capacity(shots as usize);
    let mut readout_cache: HashMap<u64, f64> = HashMap::new();
    for shot in 0..shots {
        let mut shot_rng = rng.child(shot);
        let measured = draw_from_cumulative(&cdf, &mut shot_rng);
        *counts.entry(measured).or_insert(0) += 1;
        let encoded = measured ^ mask;
        let z0 = match readout_cache.get(&encoded) {
            Some(&z) => z,
            None => {
                let z = coin_cascade_expectation(oracle, encoded)?;
                readout_cache.insert(encoded, z);
                z
            }
        };
        let (y, _) = model_output(&oracle.encoder, z0 * oracle.encoder.scale_a)?;
        ys.push(y);
        xs.push((0..n).map(|i| 1.0 - 2.0 * ((encoded >> i) & 1) as f64).collect());
    }
    Ok(ForwardPass { samples: SampleSet::new(n, shots, counts), ys, xs })
}

// ---------------------------------------------------------------------------
// Coin algebra
// ---------------------------------------------------------------------------

/// Two-branch model average: cos²θ·a + sin²θ·b.
pub fn coin_mixture_expectation(theta: f64, a_val: f64, b_val: f64) -> f64 {
    let c = theta.cos();
    let s = theta.sin();
    c * c * a_val + s * s * b_val
}

/// Elementwise convex mix of two weight vectors with coefficients
/// cos²(θ/2) and sin²(θ/2). Here θ is the full Bloch rotation angle of the
/// coin — twice the amplitude angle [`QawaOracle::coin_theta`] — so the two
/// conventions agree: cos²(θ/2) = cos²(coin_theta).
pub fn effective_weights(theta: f64, w0: &[f64], w1: &[f64]) -> Result<Vec<f64>> {
    if w0.len() != w1.len() {
        return Err(Error::invalid("weight vectors must share a length"));
    }
    for w in w0.iter().chain(w1) {
        if !(0.0..=1.0).contains(w) {
            return Err(Error::invalid(format!("weight {w} outside [0,1]")));
        }
    }
    let half = theta / 2.0;
    let c = half.cos().powi(2);
    let s = half.sin().powi(2);
    Ok(w0.iter().zip(w1).map(|(a, b)| c * a + s * b).collect())
}

/// Coin angle from the adaptive rule θ = clamp(α·f, [0, π/2]) with f the
/// mean sign-adjusted marginal of the sampled outcomes.
pub fn adaptive_coin_theta(samples: &SampleSet, sign_mask: &[bool], alpha: f64) -> Result<f64> {
    let n = samples.n_qubits();
    if sign_mask.len() != n {
        return Err(Error::invalid("sign mask length must match the register"));
    }
    if n == 0 || samples.shots() == 0 {
        return Err(Error::invalid("need a nonempty sample set"));
    }
    let mean_marginal = (0..n)
        .map(|i| {
            let sign = if sign_mask[i] { -1.0 } else { 1.0 };
            sign * (1.0 - 2.0 * samples.marginal_one(i))
        })
        .sum::<f64>()
        / n as f64;
    Ok((alpha * mean_marginal).clamp(0.0, FRAC_PI_2))
}

// ---------------------------------------------------------------------------
// Estimation and learning
// ---------------------------------------------------------------------------

/// Batch mean of per-shot readouts with its standard error.
pub fn estimate_expectation(ys: &[f64]) -> Result<Estimate> {
    if ys.is_empty() {
        return Err(Error::invalid("cannot estimate from an empty sample"));
    }
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let std_error = if ys.len() < 2 {
        0.0
    } else {
        crate::stats::sample_std(ys) / (ys.len() as f64).sqrt()
    };
    Ok(Estimate { mean, std_error })
}

fn check_model_inputs(weights: &[f64], batch: &Batch) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::invalid("batch must be nonempty"));
    }
    if weights.len() != batch.dim() {
        return Err(Error::invalid(format!(
            "weight count {} must match batch dimension {}",
            weights.len(),
            batch.dim()
        )));
    }
    Ok(())
}

fn per_sample_targets<'a>(target: &'a TargetSpec, n: usize) -> Result<Option<&'a [f64]>> {
    match &target.y_target {
        TargetValue::Scalar(_) => Ok(None),
        TargetValue::PerSample(ts) => {
            if ts.len() != n {
                return Err(Error::invalid(format!("{} targets for {n} samples", ts.len())));
            }
            Ok(Some(ts))
        }
    }
}

/// Squared deviation of the activated linear model from the target: with a
/// scalar target, (mean_j a(w·x_j) − t)²; with per-sample targets, the mean
/// of (a(w·x_j) − t_j)².
pub fn loss(weights: &[f64], batch: &Batch, target: &TargetSpec) -> Result<f64> {
    check_model_inputs(weights, batch)?;
    let n = batch.len() as f64;
    match per_sample_targets(target, batch.len())? {
        None => {
            let TargetValue::Scalar(t) = target.y_target else { unreachable!() };
            let mut mean = 0.0;
            for x in &batch.xs {
                let s: f64 = weights.iter().zip(x).map(|(w, v)| w * v).sum();
                mean += model_output(&batch.encoder, s)?.0;
            }
            mean /= n;
            Ok((mean - t) * (mean - t))
        }
        Some(ts) => {
            let mut acc = 0.0;
            for (x, t) in batch.xs.iter().zip(ts) {
                let s: f64 = weights.iter().zip(x).map(|(w, v)| w * v).sum();
                let r = model_output(&batch.encoder, s)?.0 - t;
                acc += r * r;
            }
            Ok(acc / n)
        }
    }
}

/// Analytic gradient of [`loss`]: per-sample targets give
/// (2/N)Σ_j (Y_j − t_j)·a′(w·x_j)·x_j, and a scalar target gives the chain
/// rule through the batch mean, 2(Ȳ − t)·(1/N)Σ_j a′(w·x_j)·x_j.
pub fn gradient(weights: &[f64], batch: &Batch, target: &TargetSpec) -> Result<Vec<f64>> {
    check_model_inputs(weights, batch)?;
    let n = batch.len() as f64;
    let dim = batch.dim();
    let mut grad = vec![0.0f64; dim];
    match per_sample_targets(target, batch.len())? {
        None => {
            let TargetValue::Scalar(t) = target.y_target else { unreachable!() };
            let mut mean = 0.0;
            let mut slope_sum = vec![0.0f64; dim];
            for x in &batch.xs {
                let s: f64 = weights.iter().zip(x).map(|(w, v)| w * v).sum();
                let (y, dy) = model_output(&batch.encoder, s)?;
                mean += y;
                for (g, v) in slope_sum.iter_mut().zip(x) {
                    *g += dy * v;
                }
            }
            mean /= n;
            for (g, s) in grad.iter_mut().zip(&slope_sum) {
                *g = 2.0 * (mean - t) * s / n;
            }
        }
        Some(ts) => {
            for (x, t) in batch.xs.iter().zip(ts) {
                let s: f64 = weights.iter().zip(x).map(|(w, v)| w * v).sum();
                let (y, dy) = model_output(&batch.encoder, s)?;
                for (g, v) in grad.iter_mut().zip(x) {
                    *g += 2.0 * (y - t) * dy * v / n;
                }
            }
        }
    }
    Ok(grad)
}

/// Plain projected gradient descent on the linear coefficients: step, clip
/// to [0,1], record. Stops early once the loss reaches `cfg.tolerance`;
/// aborts if it exceeds 10³ times its starting value.
pub fn train_weights(
    batch: &Batch,
    target: &TargetSpec,
    init: &[f64],
    cfg: &TrainingConfig,
) -> Result<(Vec<f64>, TrainingTrace)> {
    cfg.validate()?;
    if init.iter().any(|w| !(0.0..=1.0).contains(w)) {
        return Err(Error::invalid("initial coefficients must lie in [0,1]"));
    }
    let mut w = init.to_vec();
    let initial_loss = loss(&w, batch, target)?;
    let mut trace = TrainingTrace {
        losses: vec![initial_loss],
        weight_history: vec![w.clone()],
        converged_at: None,
    };
    if initial_loss <= cfg.tolerance {
        trace.converged_at = Some(0);
        return Ok((w, trace));
    }
    for t in 1..=cfg.iterations {
        let g = gradient(&w, batch, target)?;
        for (wi, gi) in w.iter_mut().zip(&g) {
            *wi = (*wi - cfg.eta * gi).clamp(0.0, 1.0);
        }
        let l = loss(&w, batch, target)?;
        trace.losses.push(l);
        trace.weight_history.push(w.clone());
        if l > 1e3 * initial_loss {
            return Err(Error::numeric(format!(
                "training diverged at iteration {t}: loss {l:.3e} exceeds 10³ × initial {initial_loss:.3e}"
            )));
        }
        if l <= cfg.tolerance {
            trace.converged_at = Some(t);
            break;
        }
    }
    Ok((w, trace))
}

/// Fill in a target that is computed rather than supplied: brute-force
/// alignment activates the weighted sum of the exhaustive-search optimum's
/// encoded bitstring under the oracle's current alternate-branch
/// coefficients.
pub fn resolve_target(oracle: &QawaOracle, spec: &TargetSpec) -> Result<TargetSpec> {
    match spec.source {
        TargetSource::UserSupplied | TargetSource::ClassicalCopulaCorrelation => Ok(spec.clone()),
        TargetSource::BruteForceAlignment => {
            let n = oracle.n_data_qubits();
            if n > 20 {
                return Err(Error::invalid("exhaustive alignment target capped at 20 qubits"));
            }
            let table = oracle.ising.energy_table();
            let best = table
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
                .map(|(i, _)| i as u64)
                .unwrap_or(0);
            // The energy table indexes by decision bits; the forward pipeline
            // encodes measured bits, and measurement decodes to decisions by
            // complement. Map the optimum into measured space before masking
            // so this target is the readout the pipeline would produce on it.
            let measured = !best & ((1u64 << n) - 1);
            let encoded = measured ^ oracle.mask_bits();
            let x: Vec<f64> = (0..n).map(|i| 1.0 - 2.0 * ((encoded >> i) & 1) as f64).collect();
            let coeffs = cascade_effective(&oracle.alt_weights)?.effective;
            let s: f64 = coeffs.iter().zip(&x).map(|(c, v)| c * v).sum();
            let y = model_output(&oracle.encoder, s * oracle.encoder.scale_a)?.0;
            TargetSpec::scalar(y, TargetSource::BruteForceAlignment)
        }
    }
}

/// Full training pass: draw a batch through the oracle, resolve the target,
/// run projected gradient descent on the alternate branch's effective
/// coefficients, and write the result back as cascade block weights (the
/// coefficients are normalized onto the simplex — the cascade realizes
/// convex mixtures). The coin angle is refreshed by the configured rule.
pub fn train(
    oracle: &QawaOracle,
    target: &TargetSpec,
    cfg: &TrainingConfig,
    rng: &RngStream,
) -> Result<(QawaOracle, TrainingTrace)> {
    oracle.validate()?;
    cfg.validate()?;
    let forward = run_forward(oracle, cfg.shots, &rng.child(1))?;
    let batch = Batch::from_forward(&forward, &oracle.encoder)?;
    let resolved = resolve_target(oracle, target)?;
    let init = cascade_effective(&oracle.alt_weights)?.effective;
    let (learned, trace) = train_weights(&batch, &resolved, &init, cfg)?;

    let mut trained = oracle.clone();
    let total: f64 = learned.iter().sum();
    if learned.len() >= 2 && total > 1e-12 {
        let coeffs: Vec<f64> = learned.iter().map(|w| w / total).collect();
        trained.alt_weights = cascade_invert(&coeffs)?;
    }
    if cfg.coin_f == CoinFunction::MeanEncodedMarginals {
        trained.coin_theta = adaptive_coin_theta(&forward.samples, &oracle.sign_mask, cfg.alpha_coin)?;
    }
    Ok((trained, trace))
}

// ---------------------------------------------------------------------------
// Posterior
// ---------------------------------------------------------------------------

/// P(branch 1 | observation) by Bayes' rule from the two branch likelihoods
/// and the coin prior P(branch 1) = sin²θ.
pub fn bayesian_posterior(likelihood0: f64, likelihood1: f64, prior1: f64) -> Result<f64> {
    if likelihood0 < 0.0 || likelihood1 < 0.0 {
        return Err(Error::invalid("likelihoods must be nonnegative"));
    }
    if likelihood0 == 0.0 && likelihood1 == 0.0 {
        return Err(Error::invalid("both branch likelihoods are zero"));
    }
    if !(0.0..=1.0).contains(&prior1) {
        return Err(Error::invalid(format!("prior {prior1} outside [0,1]")));
    }
    let evidence = likelihood1 * prior1 + likelihood0 * (1.0 - prior1);
    if evidence <= 0.0 {
        // A degenerate prior zeroes out the only branch with likelihood mass:
        // the observation has probability zero under the mixture and no
        // posterior is defined.
        return Err(Error::numeric("observation has zero probability under the prior mixture"));
    }
    Ok(likelihood1 * prior1 / evidence)
}

/// Mean posterior of branch 1 under branch 1's own distribution:
/// Σ_x p1(x)·P(c=1|x). Always at least the prior, strictly more when the
/// branch distributions differ (Cauchy–Schwarz on Σ p1²/mix).
pub fn mean_posterior(p0: &[f64], p1: &[f64], prior1: f64) -> Result<f64> {
    if p0.len() != p1.len() || p0.is_empty() {
        return Err(Error::invalid("distributions must share a nonzero length"));
    }
    if p0.iter().chain(p1).any(|p| *p < 0.0 || !p.is_finite()) {
        return Err(Error::invalid("probabilities must be finite and nonnegative"));
    }
    if p1.iter().sum::<f64>() <= 0.0 {
        return Err(Error::invalid("branch-1 distribution has no mass"));
    }
    let mut acc = 0.0;
    for (&l0, &l1) in p0.iter().zip(p1) {
        if l1 > 0.0 {
            acc += l1 * bayesian_posterior(l0, l1, prior1)?;
        }
    }
    Ok(acc)
}
