//! p-layer QAOA over an `IsingModel`: state preparation, exact energy
//! evaluation, and a seeded classical optimizer.
//!
//! Spin convention in this module: a measured qubit carries the Z-eigenvalue
//! `z = 1 − 2m` (|0⟩ ↦ +1). The portfolio layer relates decision bits to
//! spins by `x = (z+1)/2`, so a measured bitstring decodes to decision
//! variables by complement: `x_i = 1 − m_i`. [`decode_solution`] performs
//! that map; everything else in this module works on eigenvalues.

use crate::error::{Error, Result};
use crate::problem::IsingModel;
use crate::rng::RngStream;
use crate::sim::{SampleSet, StateVector};
use serde::{Deserialize, Serialize};

/// Variational angles for p alternating cost/mixer layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl QaoaParams {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.len() != betas.len() {
            return Err(Error::invalid("gamma and beta counts differ"));
        }
        Ok(QaoaParams { gammas, betas })
    }

    pub fn p(&self) -> usize {
        self.gammas.len()
    }
}

/// Classical optimizer settings; surfaced through the CLI config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub iterations: usize,
    pub learning_rate: f64,
    pub restarts: usize,
    pub tolerance: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig { iterations: 100, learning_rate: 0.05, restarts: 5, tolerance: 1e-9 }
    }
}

/// Central-difference step for gradient estimation.
const FD_STEP: f64 = 1e-3;

/// Classical energies of every basis index under the eigenvalue map
/// z_i = 1 − 2·bit_i.
pub fn eigen_energy_table(ising: &IsingModel, n_qubits: usize) -> Result<Vec<f64>> {
    if ising.n() != n_qubits {
        return Err(Error::invalid("Ising size does not match register width"));
    }
    let n = n_qubits;
    let mut table = Vec::with_capacity(1 << n);
    for j in 0..(1u64 << n) {
        let z: Vec<f64> = (0..n).map(|q| if (j >> q) & 1 == 1 { -1.0 } else { 1.0 }).collect();
        table.push(ising.energy_spins(&z));
    }
    Ok(table)
}

/// Decode a measured basis index into portfolio decision bits (complement,
/// since z = 1 − 2m and x = (z+1)/2).
pub fn decode_solution(measured: u64, n: usize) -> u64 {
    !measured & ((1u64 << n) - 1)
}

fn phase_multiply(state: &mut StateVector, gamma: f64, table: &[f64]) {
    for (a, e) in state.amplitudes_mut().iter_mut().zip(table) {
        *a *= crate::linalg::C64::from_polar(1.0, -gamma * e);
    }
}

/// e^{−iγH}: multiply each basis amplitude by e^{−iγE(z)}; the offset rides
/// along as a global phase. Probabilities are untouched.
pub fn cost_unitary(state: &mut StateVector, gamma: f64, ising: &IsingModel) -> Result<()> {
    let table = eigen_energy_table(ising, state.n_qubits())?;
    phase_multiply(state, gamma, &table);
    Ok(())
}

/// e^{−iβΣX}: Rx(2β) on every qubit.
pub fn mixer_unitary(state: &mut StateVector, beta: f64) -> Result<()> {
    let m = crate::sim::rx(2.0 * beta);
    for q in 0..state.n_qubits() {
        state.apply_single(&m, q)?;
    }
    Ok(())
}

fn prepare_with_table(n: usize, params: &QaoaParams, table: &[f64]) -> Result<StateVector> {
    let mut state = StateVector::zero_state(n)?;
    for q in 0..n {
        state.apply_single(&crate::sim::hadamard(), q)?;
    }
    for (gamma, beta) in params.gammas.iter().zip(&params.betas) {
        phase_multiply(&mut state, *gamma, table);
        mixer_unitary(&mut state, *beta)?;
    }
    Ok(state)
}

/// |+⟩^⊗n followed by p alternating cost and mixer layers.
pub fn prepare_qaoa_state(ising: &IsingModel, params: &QaoaParams) -> Result<StateVector> {
    let n = ising.n();
    let table = eigen_energy_table(ising, n)?;
    prepare_with_table(n, params, &table)
}

/// ⟨H⟩ = Σ_z |a_z|² E(z), offset included.
pub fn energy_expectation(state: &StateVector, ising: &IsingModel) -> Result<f64> {
    let table = eigen_energy_table(ising, state.n_qubits())?;
    Ok(state
        .amplitudes()
        .iter()
        .zip(&table)
        .map(|(a, e)| a.norm_sqr() * e)
        .sum())
}

/// Energy estimated from measured counts: Σ_z freq(z)·E(z).
pub fn energy_from_samples(samples: &SampleSet, ising: &IsingModel) -> Result<f64> {
    let table = eigen_energy_table(ising, samples.n_qubits())?;
    let shots = samples.shots() as f64;
    if shots == 0.0 {
        return Err(Error::invalid("no shots to estimate energy from"));
    }
    Ok(samples
        .counts()
        .iter()
        .map(|(j, c)| *c as f64 / shots * table[*j as usize])
        .sum())
}

/// Gradient-descent optimization with central finite differences and seeded
/// random restarts. Returns the best parameters found and the best-so-far
/// energy trace (one entry per completed iteration, monotone nonincreasing).
/// Initial angles are uniform in [0, π); restart ties keep the earlier
/// restart's result.
pub fn optimize_params(
    ising: &IsingModel,
    p: usize,
    cfg: &OptimizerConfig,
    rng: &mut RngStream,
) -> Result<(QaoaParams, Vec<f64>)> {
    if p == 0 {
        return Err(Error::invalid("optimizer needs at least one layer"));
    }
    if cfg.iterations == 0 || cfg.restarts == 0 {
        return Err(Error::invalid("iterations and restarts must be positive"));
    }
    let n = ising.n();
    let table = eigen_energy_table(ising, n)?;
    let energy_of = |params: &QaoaParams| -> Result<f64> {
        let state = prepare_with_table(n, params, &table)?;
        Ok(state.amplitudes().iter().zip(&table).map(|(a, e)| a.norm_sqr() * e).sum())
    };

    let mut best_params: Option<QaoaParams> = None;
    let mut best_energy = f64::INFINITY;
    let mut trace: Vec<f64> = Vec::new();

    for _restart in 0..cfg.restarts {
        let mut params = QaoaParams::new(
            (0..p).map(|_| rng.uniform_in(0.0, std::f64::consts::PI)).collect(),
            (0..p).map(|_| rng.uniform_in(0.0, std::f64::consts::PI)).collect(),
        )?;
        let mut prev = energy_of(&params)?;
        if prev < best_energy {
            best_energy = prev;
            best_params = Some(params.clone());
        }
        for _iter in 0..cfg.iterations {
            // Central finite differences over the concatenated angle vector.
            let mut grad_g = vec![0.0f64; p];
            let mut grad_b = vec![0.0f64; p];
            for k in 0..p {
                let mut hi = params.clone();
                let mut lo = params.clone();
                hi.gammas[k] += FD_STEP;
                lo.gammas[k] -= FD_STEP;
                grad_g[k] = (energy_of(&hi)? - energy_of(&lo)?) / (2.0 * FD_STEP);
                let mut hi = params.clone();
                let mut lo = params.clone();
                hi.betas[k] += FD_STEP;
                lo.betas[k] -= FD_STEP;
                grad_b[k] = (energy_of(&hi)? - energy_of(&lo)?) / (2.0 * FD_STEP);
            }
            for k in 0..p {
                params.gammas[k] -= cfg.learning_rate * grad_g[k];
                params.betas[k] -= cfg.learning_rate * grad_b[k];
            }
            let e = energy_of(&params)?;
            if e < best_energy {
                best_energy = e;
                best_params = Some(params.clone());
            }
            trace.push(best_energy);
            if (prev - e).abs() < cfg.tolerance {
                break;
            }
            prev = e;
        }
    }
    Ok((best_params.expect("at least one restart ran"), trace))
}
