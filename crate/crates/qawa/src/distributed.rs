//! Simulated multi-worker learning: local inversion of shallow unitaries,
//! sewing inverted sites onto ancillas with SWAPs to read data marginals
//! back out, and partitioned correlation learning with a deterministic
//! ordered merge.
//!
//! Workers are in-process threads that exchange only small records
//! (id, subset, loss, local correlation matrix) — a desk-scale stand-in for
//! separate processors sharing classical summaries. Every worker owns the
//! RNG stream derived from (seed, worker id), so results are independent of
//! thread scheduling, and a single worker replays a standalone run
//! bit-for-bit (stream 0 is the identity derivation).

use std::f64::consts::{FRAC_PI_2, PI};
use std::thread;

use serde::{Deserialize, Serialize};

use crate::arith::{cascade_effective, ActivationEncoder};
use crate::error::{Error, Result};
use crate::linalg::{Mat2, Mat4};
use crate::oracle::{train, QawaOracle, TargetSpec, TrainingConfig, TrainingTrace};
use crate::problem::IsingModel;
use crate::qaoa::QaoaParams;
use crate::rng::RngStream;
use crate::sim::{pauli_x, pauli_y, pauli_z, ry, rz, GateOp, SampleSet, StateVector, MAX_QUBITS};

const FD_STEP: f64 = 1e-4;
const UNITARY_TOL: f64 = 1e-9;

/// Dense unitary on one or two sites — the footprint local inversion works
/// against. Pair index bits follow the simulator's convention: bit 1 is the
/// high wire, bit 0 the low wire.
#[derive(Debug, Clone)]
pub enum SiteUnitary {
    Single(Mat2),
    Pair(Mat4),
}

impl SiteUnitary {
    pub fn n_sites(&self) -> usize {
        match self {
            SiteUnitary::Single(_) => 1,
            SiteUnitary::Pair(_) => 2,
        }
    }

    fn check_unitary(&self) -> Result<()> {
        let ok = match self {
            SiteUnitary::Single(m) => m.is_unitary(UNITARY_TOL),
            SiteUnitary::Pair(m) => m.is_unitary(UNITARY_TOL),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("target operator is not unitary"))
        }
    }
}

/// A learned single-site corrective unitary and the deviation it leaves.
#[derive(Debug, Clone)]
pub struct LocalInversion {
    pub site: usize,
    pub v: Mat2,
    pub loss: f64,
}

impl LocalInversion {
    pub fn validate(&self) -> Result<()> {
        if !self.v.is_unitary(UNITARY_TOL) {
            return Err(Error::invalid("inversion candidate is not unitary"));
        }
        if self.loss < 0.0 {
            return Err(Error::invalid("inversion loss cannot be negative"));
        }
        Ok(())
    }
}

/// Embed a single-site operator at `site` of a pair (site 1 = high wire).
fn embed_at(m: &Mat2, site: usize) -> Mat4 {
    if site == 1 {
        Mat4::kron(m, &Mat2::identity())
    } else {
        Mat4::kron(&Mat2::identity(), m)
    }
}

/// Deviation the candidate V leaves in U's action on the site's Pauli
/// algebra: Σ_{P ∈ {X,Y,Z}} ‖V†U†PUV − P‖ in the spectral norm. Zero iff
/// applying V after U restores every site-P expectation of any input state
/// (U then V acts as identity ⊗ something-elsewhere).
pub fn local_inversion_loss(v: &Mat2, u: &SiteUnitary, site: usize) -> Result<f64> {
    u.check_unitary()?;
    if !v.is_unitary(UNITARY_TOL) {
        return Err(Error::invalid("inversion candidate is not unitary"));
    }
    if site >= u.n_sites() {
        return Err(Error::invalid(format!("site {site} outside a {}-site operator", u.n_sites())));
    }
    let paulis = [pauli_x(), pauli_y(), pauli_z()];
    match u {
        SiteUnitary::Single(u2) => {
            let w = u2.mul(v);
            let wd = w.adjoint();
            Ok(paulis.iter().map(|p| wd.mul(p).mul(&w).sub(p).spectral_norm()).sum())
        }
        SiteUnitary::Pair(u4) => {
            let w = u4.mul(&embed_at(v, site));
            let wd = w.adjoint();
            Ok(paulis
                .iter()
                .map(|p| {
                    let pe = embed_at(p, site);
                    wd.mul(&pe).mul(&w).sub(&pe).spectral_norm()
                })
                .sum())
        }
    }
}

/// Gradient-descent budget for the inversion search; same scheme as the
/// circuit-angle optimizer (central differences, fixed step, restarts).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InversionConfig {
    pub iterations: usize,
    pub restarts: usize,
    pub learning_rate: f64,
    pub tolerance: f64,
}

impl Default for InversionConfig {
    fn default() -> Self {
        InversionConfig { iterations: 120, restarts: 4, learning_rate: 0.2, tolerance: 1e-12 }
    }
}

/// Search result plus the best-so-far loss trace (one entry per evaluated
/// step, nonincreasing).
#[derive(Debug, Clone)]
pub struct InversionOutcome {
    pub inversion: LocalInversion,
    pub losses: Vec<f64>,
}

fn euler_unitary(p: &[f64; 3]) -> Mat2 {
    rz(p[0]).mul(&ry(p[1])).mul(&rz(p[2]))
}

/// Learn a single-site V minimizing [`local_inversion_loss`] over Euler
/// angles. The identity is always the first candidate, so an already-local
/// target converges immediately; an exhausted budget returns the best found.
pub fn learn_local_inversion(
    u: &SiteUnitary,
    site: usize,
    cfg: &InversionConfig,
    rng: &mut RngStream,
) -> Result<InversionOutcome> {
    if cfg.iterations == 0 || cfg.restarts == 0 {
        return Err(Error::invalid("iterations and restarts must be positive"));
    }
    // Probe the inputs once so bad arguments fail before the search runs.
    local_inversion_loss(&Mat2::identity(), u, site)?;
    let loss_of = |p: &[f64; 3]| -> f64 {
        local_inversion_loss(&euler_unitary(p), u, site).expect("euler candidates are unitary")
    };

    let mut best_params = [0.0f64; 3];
    let mut best_loss = loss_of(&best_params);
    let mut losses = vec![best_loss];

    for restart in 0..cfg.restarts {
        let mut params = if restart == 0 {
            [0.0; 3]
        } else {
            [rng.uniform_in(-PI, PI), rng.uniform_in(-PI, PI), rng.uniform_in(-PI, PI)]
        };
        let mut prev = loss_of(&params);
        if prev < best_loss {
            best_loss = prev;
            best_params = params;
        }
        // The deviation norm is cone-shaped near an exact inverse, so a
        // fixed step would orbit the minimum; halve it on any non-improving
        // iteration instead.
        let mut step = cfg.learning_rate;
        for _ in 0..cfg.iterations {
            let mut grad = [0.0f64; 3];
            for (k, g) in grad.iter_mut().enumerate() {
                let mut hi = params;
                let mut lo = params;
                hi[k] += FD_STEP;
                lo[k] -= FD_STEP;
                *g = (loss_of(&hi) - loss_of(&lo)) / (2.0 * FD_STEP);
            }
            for (p, g) in params.iter_mut().zip(&grad) {
                *p -= step * g;
            }
            let l = loss_of(&params);
            if l < best_loss {
                best_loss = l;
                best_params = params;
            }
            if l >= prev {
                step *= 0.5;
            }
            losses.push(best_loss);
            if best_loss < cfg.tolerance || (prev - l).abs() < cfg.tolerance || step < 1e-9 {
                break;
            }
            prev = l;
        }
        if best_loss < cfg.tolerance {
            break;
        }
    }
    let inversion = LocalInversion { site, v: euler_unitary(&best_params), loss: best_loss };
    inversion.validate()?;
    Ok(InversionOutcome { inversion, losses })
}

/// What sewing read back: for each treated site, the data-state ⟨Z⟩ before
/// the oracle acted and the ancilla ⟨Z⟩ after oracle → inversions → SWAP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SewReport {
    pub sites: Vec<usize>,
    pub original: Vec<f64>,
    pub extracted: Vec<f64>,
}

impl SewReport {
    pub fn max_deviation(&self) -> f64 {
        self.original
            .iter()
            .zip(&self.extracted)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn check_register(gates: &[GateOp], n_data: usize, label: &str) -> Result<()> {
    for gate in gates {
        if gate.support().iter().any(|q| *q >= n_data) {
            return Err(Error::invalid(format!("{label} circuit touches the ancilla register")));
        }
    }
    Ok(())
}

/// Simulate data preparation, the oracle, each learned inversion at its
/// site, then a SWAP of every treated site onto its ancilla; report the
/// ancilla ⟨Z⟩ next to the data state's own ⟨Z⟩ at the same sites. With
/// zero-loss inversions the two columns agree exactly; with small losses
/// the gap is proportionally small.
pub fn sew_and_extract(
    data_prep: &[GateOp],
    oracle_gates: &[GateOp],
    n_data: usize,
    inversions: &[LocalInversion],
) -> Result<SewReport> {
    if n_data == 0 {
        return Err(Error::invalid("need at least one data qubit"));
    }
    if 2 * n_data > MAX_QUBITS {
        return Err(Error::invalid(format!("{n_data} data qubits plus ancillas exceed the register cap")));
    }
    check_register(data_prep, n_data, "data preparation")?;
    check_register(oracle_gates, n_data, "oracle")?;
    let mut seen = vec![false; n_data];
    for inv in inversions {
        inv.validate()?;
        if inv.site >= n_data {
            return Err(Error::invalid(format!("inversion site {} outside the data register", inv.site)));
        }
        if seen[inv.site] {
            return Err(Error::invalid(format!("site {} has more than one inversion", inv.site)));
        }
        seen[inv.site] = true;
    }

    let mut reference = StateVector::zero_state(n_data)?;
    reference.apply_circuit(data_prep)?;
    let original: Vec<f64> = inversions.iter().map(|inv| reference.expectation_z(inv.site)).collect();

    let mut state = StateVector::zero_state(2 * n_data)?;
    state.apply_circuit(data_prep)?;
    state.apply_circuit(oracle_gates)?;
    for inv in inversions {
        state.apply_single(&inv.v, inv.site)?;
    }
    for inv in inversions {
        state.apply_gate(&GateOp::Swap { a: inv.site, b: n_data + inv.site })?;
    }
    let extracted: Vec<f64> = inversions.iter().map(|inv| state.expectation_z(n_data + inv.site)).collect();
    let sites = inversions.iter().map(|inv| inv.site).collect();
    Ok(SewReport { sites, original, extracted })
}

/// One worker's share of a partitioned run: which qubits it owns, the
/// convex input coefficients it learned, and its local correlation matrix
/// (symmetric, |S|×|S|, aligned with `qubits`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkerPartition {
    pub worker_id: usize,
    pub qubits: Vec<usize>,
    pub weights: Vec<f64>,
    pub correlations: Vec<Vec<f64>>,
}

/// The classical record a worker ships to the merge step: id, subset, final
/// loss, and the local correlation matrix flattened row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkerReport {
    pub id: usize,
    pub subset: Vec<usize>,
    pub loss: f64,
    pub c_m: Vec<f64>,
}

/// Everything one worker produced.
#[derive(Debug, Clone)]
pub struct WorkerOutcome {
    pub partition: WorkerPartition,
    pub trace: TrainingTrace,
    pub loss: f64,
}

impl WorkerOutcome {
    pub fn report(&self) -> WorkerReport {
        WorkerReport {
            id: self.partition.worker_id,
            subset: self.partition.qubits.clone(),
            loss: self.loss,
            c_m: self.partition.correlations.iter().flatten().copied().collect(),
        }
    }
}

/// Merged result: the global matrix is the sum of zero-padded local
/// matrices (overlapping subsets therefore sum, not average), and the run
/// converged when the workers' total loss fell below epsilon.
#[derive(Debug, Clone)]
pub struct DistributedOutcome {
    pub global_c: Vec<Vec<f64>>,
    pub workers: Vec<WorkerOutcome>,
    pub total_loss: f64,
    pub converged: bool,
}

/// Budget for a partitioned run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartitionConfig {
    pub training: TrainingConfig,
    pub qaoa: QaoaParams,
    pub epsilon: f64,
    pub sample_shots: u64,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        PartitionConfig {
            training: TrainingConfig::default(),
            qaoa: QaoaParams::new(vec![0.4], vec![0.3]).expect("fixed lengths agree"),
            epsilon: 0.05,
            sample_shots: 2048,
        }
    }
}

/// Contiguous near-even split of n qubits over m workers.
pub fn even_partition(n: usize, m: usize) -> Result<Vec<Vec<usize>>> {
    if m == 0 || n == 0 {
        return Err(Error::invalid("need at least one worker and one qubit"));
    }
    if m > n {
        return Err(Error::invalid("more workers than qubits leaves empty subsets"));
    }
    let base = n / m;
    let extra = n % m;
    let mut out = Vec::with_capacity(m);
    let mut start = 0usize;
    for w in 0..m {
        let len = base + usize::from(w < extra);
        out.push((start..start + len).collect());
        start += len;
    }
    Ok(out)
}

fn validate_subsets(n: usize, subsets: &[Vec<usize>]) -> Result<()> {
    if subsets.is_empty() {
        return Err(Error::invalid("need at least one worker subset"));
    }
    let mut covered = vec![false; n];
    for (m, s) in subsets.iter().enumerate() {
        if s.is_empty() {
            return Err(Error::invalid(format!("worker {m} has an empty subset")));
        }
        let mut local = vec![false; n];
        for &q in s {
            if q >= n {
                return Err(Error::invalid(format!("worker {m} references qubit {q} of {n}")));
            }
            if local[q] {
                return Err(Error::invalid(format!("worker {m} lists qubit {q} twice")));
            }
            local[q] = true;
            covered[q] = true;
        }
    }
    if let Some(q) = covered.iter().position(|c| !c) {
        return Err(Error::invalid(format!("qubit {q} is covered by no worker")));
    }
    Ok(())
}

/// Restriction of the problem to a qubit subset: fields and within-subset
/// couplings survive, couplings across the cut are dropped.
fn restrict_ising(ising: &IsingModel, subset: &[usize]) -> IsingModel {
    let k = subset.len();
    let h = subset.iter().map(|&q| ising.h[q]).collect();
    let mut j = vec![vec![0.0f64; k]; k];
    for (a, &qa) in subset.iter().enumerate() {
        for (b, &qb) in subset.iter().enumerate() {
            j[a][b] = ising.j[qa][qb];
        }
    }
    IsingModel { j, h, offset: ising.offset }
}

/// Pearson correlation matrix of the measured bits; a constant bit carries
/// zero off-diagonal entries instead of failing, since a worker whose
/// distribution collapsed onto one outcome still ships a valid record.
pub fn bit_correlations_lenient(samples: &SampleSet) -> Vec<Vec<f64>> {
    let n = samples.n_qubits();
    let total = samples.shots() as f64;
    let mut mean = vec![0.0f64; n];
    let mut joint = vec![vec![0.0f64; n]; n];
    for (&basis, &count) in samples.counts() {
        let w = count as f64 / total;
        for i in 0..n {
            if (basis >> i) & 1 == 1 {
                mean[i] += w;
                for j in 0..n {
                    if (basis >> j) & 1 == 1 {
                        joint[i][j] += w;
                    }
                }
            }
        }
    }
    let sd: Vec<f64> = mean.iter().map(|m| (m * (1.0 - m)).max(0.0).sqrt()).collect();
    let mut c = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        c[i][i] = 1.0;
        for j in (i + 1)..n {
            let denom = sd[i] * sd[j];
            let r = if denom > 0.0 { ((joint[i][j] - mean[i] * mean[j]) / denom).clamp(-1.0, 1.0) } else { 0.0 };
            c[i][j] = r;
            c[j][i] = r;
        }
    }
    c
}

fn worker_oracle(sub: IsingModel, cfg: &PartitionConfig) -> Result<QawaOracle> {
    let k = sub.n();
    let mut oracle = QawaOracle::new(
        sub,
        cfg.qaoa.clone(),
        ActivationEncoder::default(),
        vec![1.0; k.saturating_sub(1)],
        vec![1.0; k.saturating_sub(1)],
        FRAC_PI_2,
        vec![false; k],
    )?;
    if k >= 2 {
        // A uniform start keeps every readout on a sloped part of the
        // activation; the all-ones default would saturate and freeze descent.
        oracle.set_learned_coefficients(&vec![1.0 / k as f64; k])?;
    }
    Ok(oracle)
}

fn run_worker(ising: &IsingModel, subset: &[usize], cfg: &PartitionConfig, seed: u64, id: usize) -> Result<WorkerOutcome> {
    let rng = RngStream::derived(seed, id as u64);
    let oracle = worker_oracle(restrict_ising(ising, subset), cfg)?;
    let (trained, trace) = train(&oracle, &TargetSpec::brute_force_alignment(), &cfg.training, &rng)?;
    let loss = trace.best_so_far().last().copied().unwrap_or(f64::INFINITY);
    let forward = crate::oracle::run_forward(&trained, cfg.sample_shots, &rng.child(2))?;
    let correlations = bit_correlations_lenient(&forward.samples);
    let weights = if subset.len() >= 2 {
        cascade_effective(&trained.alt_weights)?.effective
    } else {
        vec![1.0]
    };
    Ok(WorkerOutcome {
        partition: WorkerPartition {
            worker_id: id,
            qubits: subset.to_vec(),
            weights,
            correlations,
        },
        trace,
        loss,
    })
}

/// Train one restricted instance per subset on concurrent workers and merge
/// their records in worker-id order: the global matrix is ΣC_m with each
/// C_m zero-padded outside S_m×S_m.
pub fn partition_learn(
    ising: &IsingModel,
    subsets: &[Vec<usize>],
    cfg: &PartitionConfig,
    seed: u64,
) -> Result<DistributedOutcome> {
    let n = ising.n();
    validate_subsets(n, subsets)?;
    cfg.training.validate()?;

    let results: Vec<Result<WorkerOutcome>> = thread::scope(|scope| {
        let handles: Vec<_> = subsets
            .iter()
            .enumerate()
            .map(|(id, subset)| scope.spawn(move || run_worker(ising, subset, cfg, seed, id)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker thread panicked")).collect()
    });

    let mut workers = Vec::with_capacity(results.len());
    for outcome in results {
        workers.push(outcome?);
    }

    let mut global_c = vec![vec![0.0f64; n]; n];
    let mut total_loss = 0.0;
    for w in &workers {
        total_loss += w.loss;
        for (a, &qa) in w.partition.qubits.iter().enumerate() {
            for (b, &qb) in w.partition.qubits.iter().enumerate() {
                global_c[qa][qb] += w.partition.correlations[a][b];
            }
        }
    }
    let converged = total_loss < cfg.epsilon;
    Ok(DistributedOutcome { global_c, workers, total_loss, converged })
}
