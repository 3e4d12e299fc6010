//! Dense statevector simulator.
//!
//! The register holds 2ⁿ complex amplitudes indexed little-endian: bit `q`
//! of a basis index `j` is the state of qubit `q`, i.e. `j = Σ_q b_q·2^q`.
//! Bitstring text follows the same convention with qubit 0 as the *leftmost*
//! character, so the basis index 0b110 (qubits 1 and 2 set) renders as
//! `"011"`. Both conventions are used consistently by every module and by
//! all file outputs.
//!
//! Two-qubit unitaries are supplied as 4×4 matrices whose row index is the
//! two-bit number `2·b(q_high) + b(q_low)`; `q_high` is the matrix's high
//! wire and `q_low` its low wire. A matrix written as A ⊗ B therefore has A
//! acting on `q_high` and B on `q_low`.
//!
//! Gates never renormalize — unitarity keeps ‖ψ‖ = 1 to rounding — and
//! projective measurement renormalizes exactly once after collapse. The
//! upper size limit is 24 qubits (256 MiB of amplitudes).

use crate::error::{Error, Result};
use crate::linalg::{C64, Mat2, Mat4, ONE_C, ZERO_C};
use crate::rng::RngStream;
use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

/// Hard cap on register width; 2²⁴ amplitudes is the largest statevector
/// this crate will allocate.
pub const MAX_QUBITS: usize = 24;

/// A gate in a circuit description. `TwoQubit` wires follow the module-level
/// matrix convention; `controls` (where present) condition the gate on every
/// listed qubit being |1⟩.
#[derive(Debug, Clone)]
pub enum GateOp {
    X { q: usize },
    H { q: usize },
    Rx { q: usize, theta: f64 },
    Ry { q: usize, theta: f64 },
    Rz { q: usize, theta: f64 },
    Cx { control: usize, target: usize },
    Swap { a: usize, b: usize },
    TwoQubit { m: Mat4, q_high: usize, q_low: usize },
    ControlledTwoQubit { control: usize, m: Mat4, q_high: usize, q_low: usize },
}

impl GateOp {
    /// Qubits the gate touches (targets and controls alike).
    pub fn support(&self) -> Vec<usize> {
        match self {
            GateOp::X { q } | GateOp::H { q } | GateOp::Rx { q, .. } | GateOp::Ry { q, .. } | GateOp::Rz { q, .. } => vec![*q],
            GateOp::Cx { control, target } => vec![*control, *target],
            GateOp::Swap { a, b } => vec![*a, *b],
            GateOp::TwoQubit { q_high, q_low, .. } => vec![*q_high, *q_low],
            GateOp::ControlledTwoQubit { control, q_high, q_low, .. } => vec![*control, *q_high, *q_low],
        }
    }

    pub fn is_entangling(&self) -> bool {
        matches!(
            self,
            GateOp::Cx { .. } | GateOp::Swap { .. } | GateOp::TwoQubit { .. } | GateOp::ControlledTwoQubit { .. }
        )
    }
}

/// Outcome of one projective single-qubit measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementRecord {
    pub qubit: usize,
    pub outcome: u8,
    /// Born probability of the outcome that was drawn.
    pub probability: f64,
}

/// Counted measurement outcomes over a register.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    n_qubits: usize,
    shots: u64,
    counts: BTreeMap<u64, u64>,
}

impl SampleSet {
    pub fn new(n_qubits: usize, shots: u64, counts: BTreeMap<u64, u64>) -> Self {
        SampleSet { n_qubits, shots, counts }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn counts(&self) -> &BTreeMap<u64, u64> {
        &self.counts
    }

    pub fn frequency(&self, basis: u64) -> f64 {
        if self.shots == 0 {
            return 0.0;
        }
        *self.counts.get(&basis).unwrap_or(&0) as f64 / self.shots as f64
    }

    /// Fraction of shots with qubit `q` measured one.
    pub fn marginal_one(&self, q: usize) -> f64 {
        if self.shots == 0 {
            return 0.0;
        }
        let ones: u64 = self
            .counts
            .iter()
            .filter(|(j, _)| (*j >> q) & 1 == 1)
            .map(|(_, c)| *c)
            .sum();
        ones as f64 / self.shots as f64
    }

    /// Render a basis index with qubit 0 leftmost.
    pub fn bitstring(&self, basis: u64) -> String {
        render_bitstring(basis, self.n_qubits)
    }
}

/// Qubit-0-leftmost text form of a basis index.
pub fn render_bitstring(basis: u64, n_qubits: usize) -> String {
    (0..n_qubits)
        .map(|q| if (basis >> q) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Parse the text form back to a basis index.
pub fn parse_bitstring(s: &str) -> Result<u64> {
    let mut j = 0u64;
    for (q, ch) in s.chars().enumerate() {
        match ch {
            '0' => {}
            '1' => j |= 1 << q,
            _ => return Err(Error::invalid(format!("bad bitstring character {ch:?}"))),
        }
    }
    Ok(j)
}

/// Dense statevector over `n` qubits.
#[derive(Debug, Clone)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// |0…0⟩ on `n_qubits`.
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::invalid(format!(
                "register width {n_qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        let mut amps = vec![ZERO_C; 1 << n_qubits];
        amps[0] = ONE_C;
        Ok(StateVector { n_qubits, amps })
    }

    /// Basis state |j⟩.
    pub fn basis_state(n_qubits: usize, basis: u64) -> Result<Self> {
        let mut sv = Self::zero_state(n_qubits)?;
        if basis >= (1u64 << n_qubits) {
            return Err(Error::invalid(format!("basis index {basis} out of range")));
        }
        sv.amps[0] = ZERO_C;
        sv.amps[basis as usize] = ONE_C;
        Ok(sv)
    }

    /// Build from explicit amplitudes; the length must be a power of two and
    /// the norm must already be 1 within 1e-10.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() || len > (1 << MAX_QUBITS) {
            return Err(Error::invalid(format!("amplitude count {len} is not a supported power of two")));
        }
        let n_qubits = len.trailing_zeros() as usize;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!("state norm² = {norm}, expected 1")));
        }
        Ok(StateVector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    /// Mutable amplitude view for norm-preserving in-place transforms
    /// (diagonal phase multiplies); callers must keep ‖ψ‖ = 1.
    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probability(&self, basis: u64) -> f64 {
        self.amps[basis as usize].norm_sqr()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            Err(Error::invalid(format!("qubit {q} out of range for {} qubits", self.n_qubits)))
        } else {
            Ok(())
        }
    }

    /// Apply a 2×2 unitary to qubit `q`.
    pub fn apply_single(&mut self, m: &Mat2, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let bit = 1usize << q;
        let n = self.amps.len();
        let mut j = 0usize;
        while j < n {
            if j & bit == 0 {
                let a0 = self.amps[j];
                let a1 = self.amps[j | bit];
                self.amps[j] = m.0[0][0] * a0 + m.0[0][1] * a1;
                self.amps[j | bit] = m.0[1][0] * a0 + m.0[1][1] * a1;
            }
            j += 1;
        }
        Ok(())
    }

    /// Apply a 4×4 unitary to `(q_high, q_low)`; row index = 2·b(q_high) + b(q_low).
    /// With `controls` nonempty the action is restricted to the subspace where
    /// every control qubit is |1⟩.
    pub fn apply_two(&mut self, m: &Mat4, q_high: usize, q_low: usize, controls: &[usize]) -> Result<()> {
        self.check_qubit(q_high)?;
        self.check_qubit(q_low)?;
        if q_high == q_low {
            return Err(Error::invalid("two-qubit gate wires must differ"));
        }
        let mut cmask = 0usize;
        for &c in controls {
            self.check_qubit(c)?;
            if c == q_high || c == q_low {
                return Err(Error::invalid("control overlaps a target wire"));
            }
            cmask |= 1 << c;
        }
        let hi = 1usize << q_high;
        let lo = 1usize << q_low;
        let n = self.amps.len();
        for j in 0..n {
            if j & (hi | lo) != 0 {
                continue;
            }
            if j & cmask != cmask {
                continue;
            }
            let idx = [j, j | lo, j | hi, j | hi | lo];
            let old = [self.amps[idx[0]], self.amps[idx[1]], self.amps[idx[2]], self.amps[idx[3]]];
            for r in 0..4 {
                let mut acc = ZERO_C;
                for (c, o) in old.iter().enumerate() {
                    acc += m.0[r][c] * o;
                }
                self.amps[idx[r]] = acc;
            }
        }
        Ok(())
    }

    /// Apply a single-qubit unitary conditioned on `control` being |1⟩.
    pub fn apply_controlled_single(&mut self, m: &Mat2, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::invalid("control equals target"));
        }
        let cbit = 1usize << control;
        let tbit = 1usize << target;
        let n = self.amps.len();
        for j in 0..n {
            if j & tbit == 0 && j & cbit == cbit {
                let a0 = self.amps[j];
                let a1 = self.amps[j | tbit];
                self.amps[j] = m.0[0][0] * a0 + m.0[0][1] * a1;
                self.amps[j | tbit] = m.0[1][0] * a0 + m.0[1][1] * a1;
            }
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: &GateOp) -> Result<()> {
        match gate {
            GateOp::X { q } => self.apply_single(&pauli_x(), *q),
            GateOp::H { q } => self.apply_single(&hadamard(), *q),
            GateOp::Rx { q, theta } => self.apply_single(&rx(*theta), *q),
            GateOp::Ry { q, theta } => self.apply_single(&ry(*theta), *q),
            GateOp::Rz { q, theta } => self.apply_single(&rz(*theta), *q),
            GateOp::Cx { control, target } => self.apply_controlled_single(&pauli_x(), *control, *target),
            GateOp::Swap { a, b } => {
                self.apply_controlled_single(&pauli_x(), *a, *b)?;
                self.apply_controlled_single(&pauli_x(), *b, *a)?;
                self.apply_controlled_single(&pauli_x(), *a, *b)
            }
            GateOp::TwoQubit { m, q_high, q_low } => self.apply_two(m, *q_high, *q_low, &[]),
            GateOp::ControlledTwoQubit { control, m, q_high, q_low } => {
                self.apply_two(m, *q_high, *q_low, std::slice::from_ref(control))
            }
        }
    }

    pub fn apply_circuit(&mut self, gates: &[GateOp]) -> Result<()> {
        for g in gates {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    /// Projectively measure qubit `q`: draw an outcome by the Born rule
    /// (outcome 1 when u < P(1)), zero the losing branch, renormalize.
    pub fn measure_qubit(&mut self, q: usize, rng: &mut RngStream) -> Result<MeasurementRecord> {
        self.check_qubit(q)?;
        let bit = 1usize << q;
        let p1: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(j, _)| j & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        let outcome = u8::from(rng.uniform() < p1);
        let p = if outcome == 1 { p1 } else { 1.0 - p1 };
        if p <= 0.0 {
            return Err(Error::numeric(format!(
                "measurement drew an outcome of probability {p}; state norm drifted"
            )));
        }
        let keep = outcome as usize * bit;
        let scale = 1.0 / p.sqrt();
        for (j, a) in self.amps.iter_mut().enumerate() {
            if j & bit == keep {
                *a *= scale;
            } else {
                *a = ZERO_C;
            }
        }
        Ok(MeasurementRecord { qubit: q, outcome, probability: p })
    }

    /// Measure then flip if the outcome was 1, leaving the qubit in |0⟩.
    pub fn reset_qubit(&mut self, q: usize, rng: &mut RngStream) -> Result<MeasurementRecord> {
        let rec = self.measure_qubit(q, rng)?;
        if rec.outcome == 1 {
            self.apply_single(&pauli_x(), q)?;
        }
        Ok(rec)
    }

    /// ⟨Z_q⟩ = P(q=0) − P(q=1).
    pub fn expectation_z(&self, q: usize) -> f64 {
        let bit = 1usize << q;
        let mut acc = 0.0;
        for (j, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            acc += if j & bit == 0 { p } else { -p };
        }
        acc
    }

    /// ⟨Z_a Z_b⟩.
    pub fn expectation_zz(&self, a: usize, b: usize) -> f64 {
        let ba = 1usize << a;
        let bb = 1usize << b;
        let mut acc = 0.0;
        for (j, amp) in self.amps.iter().enumerate() {
            let sign = ((j & ba != 0) as i32 + (j & bb != 0) as i32) % 2;
            let p = amp.norm_sqr();
            acc += if sign == 0 { p } else { -p };
        }
        acc
    }

    /// Running sums of |⟨j|ψ⟩|², for repeated Born-rule draws against a
    /// fixed state. Errors if the norm has drifted from 1.
    pub fn cumulative_probabilities(&self) -> Result<Vec<f64>> {
        let mut cumulative = Vec::with_capacity(self.amps.len());
        let mut acc = 0.0f64;
        for a in &self.amps {
            acc += a.norm_sqr();
            cumulative.push(acc);
        }
        if (acc - 1.0).abs() > 1e-9 {
            return Err(Error::numeric(format!("state norm² = {acc} drifted before sampling")));
        }
        Ok(cumulative)
    }

    /// Draw `shots` independent full-register outcomes by the Born rule.
    /// The state is not modified; each shot is an i.i.d. sample of the joint
    /// distribution |⟨j|ψ⟩|².
    pub fn sample_bitstrings(&self, shots: u64, rng: &mut RngStream) -> Result<SampleSet> {
        let cumulative = self.cumulative_probabilities()?;
        let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
        for _ in 0..shots {
            *counts.entry(draw_from_cumulative(&cumulative, rng)).or_insert(0) += 1;
        }
        Ok(SampleSet::new(self.n_qubits, shots, counts))
    }
}

/// One Born-rule draw from a precomputed cumulative-probability table.
pub fn draw_from_cumulative(cumulative: &[f64], rng: &mut RngStream) -> u64 {
    let total = *cumulative.last().expect("cumulative table is nonempty");
    let u = rng.uniform() * total;
    cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1) as u64
}

// ---------------------------------------------------------------------------
// Standard gate matrices. Rotation conventions: R_a(θ) = exp(−i θ A/2) for
// A ∈ {X, Y, Z}, i.e. Ry(θ) = [[cos θ/2, −sin θ/2], [sin θ/2, cos θ/2]].
// ---------------------------------------------------------------------------

pub fn pauli_x() -> Mat2 {
    Mat2([[ZERO_C, ONE_C], [ONE_C, ZERO_C]])
}

pub fn pauli_y() -> Mat2 {
    Mat2([[ZERO_C, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), ZERO_C]])
}

pub fn pauli_z() -> Mat2 {
    Mat2([[ONE_C, ZERO_C], [ZERO_C, C64::new(-1.0, 0.0)]])
}

pub fn hadamard() -> Mat2 {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    Mat2([[h, h], [h, -h]])
}

pub fn rx(theta: f64) -> Mat2 {
    let c = C64::new((theta / 2.0).cos(), 0.0);
    let s = C64::new(0.0, -(theta / 2.0).sin());
    Mat2([[c, s], [s, c]])
}

pub fn ry(theta: f64) -> Mat2 {
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    Mat2([[C64::new(c, 0.0), C64::new(-s, 0.0)], [C64::new(s, 0.0), C64::new(c, 0.0)]])
}

pub fn rz(theta: f64) -> Mat2 {
    Mat2([
        [C64::from_polar(1.0, -theta / 2.0), ZERO_C],
        [ZERO_C, C64::from_polar(1.0, theta / 2.0)],
    ])
}

/// Greedy circuit depth: gates pack into the earliest layer where all their
/// qubits are free.
pub fn circuit_depth(gates: &[GateOp]) -> usize {
    let mut busy_until: BTreeMap<usize, usize> = BTreeMap::new();
    let mut depth = 0usize;
    for g in gates {
        let layer = g
            .support()
            .iter()
            .map(|q| *busy_until.get(q).unwrap_or(&0))
            .max()
            .unwrap_or(0)
            + 1;
        for q in g.support() {
            busy_until.insert(q, layer);
        }
        depth = depth.max(layer);
    }
    depth
}

/// Number of CX gates in a circuit (other two-qubit gates not counted).
pub fn cx_census(gates: &[GateOp]) -> usize {
    gates.iter().filter(|g| matches!(g, GateOp::Cx { .. })).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(seed: u64) -> RngStream {
        RngStream::from_seed(seed)
    }

    #[test]
    fn x_flips_zero_to_one() {
        let mut sv = StateVector::zero_state(1).unwrap();
        sv.apply_gate(&GateOp::X { q: 0 }).unwrap();
        assert!((sv.probability(1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hadamard_gives_uniform_single_qubit() {
        let mut sv = StateVector::zero_state(1).unwrap();
        sv.apply_gate(&GateOp::H { q: 0 }).unwrap();
        assert!((sv.probability(0) - 0.5).abs() < 1e-12);
        assert!((sv.probability(1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cx_on_control_one_flips_target() {
        // Prepare qubit 0 (control) in |1⟩, qubit 1 in |0⟩; CX must give |11⟩.
        let mut sv = StateVector::basis_state(2, 0b01).unwrap();
        sv.apply_gate(&GateOp::Cx { control: 0, target: 1 }).unwrap();
        assert!((sv.probability(0b11) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ry_rotates_expectation() {
        let theta = 0.7f64;
        let mut sv = StateVector::zero_state(1).unwrap();
        sv.apply_gate(&GateOp::Ry { q: 0, theta }).unwrap();
        assert!((sv.expectation_z(0) - theta.cos()).abs() < 1e-12);
    }

    #[test]
    fn norm_preserved_through_long_random_circuit() {
        let mut rng = stream(11);
        let mut sv = StateVector::zero_state(5).unwrap();
        for k in 0..200 {
            let q = (k * 7) % 5;
            let p = (q + 1 + k % 3) % 5;
            match k % 6 {
                0 => sv.apply_gate(&GateOp::H { q }).unwrap(),
                1 => sv.apply_gate(&GateOp::Rx { q, theta: rng.uniform_in(0.0, 6.0) }).unwrap(),
                2 => sv.apply_gate(&GateOp::Ry { q, theta: rng.uniform_in(0.0, 6.0) }).unwrap(),
                3 => sv.apply_gate(&GateOp::Rz { q, theta: rng.uniform_in(0.0, 6.0) }).unwrap(),
                4 => sv.apply_gate(&GateOp::Cx { control: q, target: p }).unwrap(),
                _ => sv.apply_gate(&GateOp::Swap { a: q, b: p }).unwrap(),
            }
            assert!((sv.norm_sqr() - 1.0).abs() < 1e-10, "norm drifted at step {k}");
        }
    }

    #[test]
    fn unitary_roundtrip_restores_state() {
        // U then U† must restore any state it is applied to.
        let mut rng = stream(3);
        for _ in 0..50 {
            let theta = rng.uniform_in(-3.0, 3.0);
            let phi = rng.uniform_in(-3.0, 3.0);
            let mut sv = StateVector::zero_state(3).unwrap();
            sv.apply_gate(&GateOp::H { q: 0 }).unwrap();
            sv.apply_gate(&GateOp::Ry { q: 1, theta }).unwrap();
            sv.apply_gate(&GateOp::Cx { control: 0, target: 2 }).unwrap();
            let before = sv.clone();
            sv.apply_gate(&GateOp::Rz { q: 2, theta: phi }).unwrap();
            sv.apply_gate(&GateOp::Rz { q: 2, theta: -phi }).unwrap();
            for (a, b) in sv.amplitudes().iter().zip(before.amplitudes()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn global_phase_leaves_observables_unchanged() {
        let mut rng = stream(5);
        for _ in 0..20 {
            let mut sv = StateVector::zero_state(3).unwrap();
            sv.apply_gate(&GateOp::H { q: 0 }).unwrap();
            sv.apply_gate(&GateOp::Ry { q: 1, theta: rng.uniform_in(0.0, 3.0) }).unwrap();
            sv.apply_gate(&GateOp::Cx { control: 0, target: 1 }).unwrap();
            let phase = C64::from_polar(1.0, rng.uniform_in(0.0, 6.28));
            let shifted =
                StateVector::from_amplitudes(sv.amplitudes().iter().map(|a| a * phase).collect()).unwrap();
            for j in 0..8 {
                assert!((sv.probability(j) - shifted.probability(j)).abs() < 1e-12);
            }
            for q in 0..3 {
                assert!((sv.expectation_z(q) - shifted.expectation_z(q)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn measurement_collapse_matches_projector_arithmetic() {
        // 3-qubit GHZ; measuring qubit 0 must collapse onto P_m|ψ⟩/√P(m).
        for seed in 0..20 {
            let mut sv = StateVector::zero_state(3).unwrap();
            sv.apply_gate(&GateOp::H { q: 0 }).unwrap();
            sv.apply_gate(&GateOp::Cx { control: 0, target: 1 }).unwrap();
            sv.apply_gate(&GateOp::Cx { control: 1, target: 2 }).unwrap();
            let before = sv.clone();
            let mut rng = stream(seed);
            let rec = sv.measure_qubit(0, &mut rng).unwrap();
            assert!((rec.probability - 0.5).abs() < 1e-12);
            // Projector arithmetic oracle.
            let keep = rec.outcome as usize;
            let mut projected: Vec<C64> = before
                .amplitudes()
                .iter()
                .enumerate()
                .map(|(j, a)| if j & 1 == keep { *a } else { ZERO_C })
                .collect();
            let norm: f64 = projected.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            for a in projected.iter_mut() {
                *a /= norm;
            }
            for (a, b) in sv.amplitudes().iter().zip(&projected) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn reset_leaves_qubit_in_zero() {
        for seed in 0..10 {
            let mut rng = stream(100 + seed);
            let mut sv = StateVector::zero_state(2).unwrap();
            sv.apply_gate(&GateOp::Ry { q: 0, theta: 2.2 }).unwrap();
            sv.apply_gate(&GateOp::Cx { control: 0, target: 1 }).unwrap();
            sv.reset_qubit(0, &mut rng).unwrap();
            let p1: f64 = (0..4).filter(|j| j & 1 == 1).map(|j| sv.probability(j)).sum();
            assert!(p1 < 1e-12);
            assert!((sv.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn sampling_is_deterministic_given_seed() {
        let mut sv = StateVector::zero_state(3).unwrap();
        for q in 0..3 {
            sv.apply_gate(&GateOp::H { q }).unwrap();
        }
        let a = sv.sample_bitstrings(500, &mut stream(9)).unwrap();
        let b = sv.sample_bitstrings(500, &mut stream(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sampling_frequencies_track_born_probabilities() {
        // Born-rule consistency on a skewed two-qubit state, 3σ binomial bands.
        let mut sv = StateVector::zero_state(2).unwrap();
        sv.apply_gate(&GateOp::Ry { q: 0, theta: 1.1 }).unwrap();
        sv.apply_gate(&GateOp::Ry { q: 1, theta: 2.3 }).unwrap();
        sv.apply_gate(&GateOp::Cx { control: 0, target: 1 }).unwrap();
        let shots = 200_000u64;
        let samples = sv.sample_bitstrings(shots, &mut stream(21)).unwrap();
        for j in 0..4u64 {
            let p = sv.probability(j);
            let se = (p * (1.0 - p) / shots as f64).sqrt();
            assert!(
                (samples.frequency(j) - p).abs() <= 3.0 * se + 1e-9,
                "basis {j}: freq {} vs p {p}",
                samples.frequency(j)
            );
        }
    }

    #[test]
    fn deterministic_state_samples_single_string() {
        let sv = StateVector::basis_state(3, 0b101).unwrap();
        let samples = sv.sample_bitstrings(64, &mut stream(2)).unwrap();
        assert_eq!(samples.counts().len(), 1);
        assert_eq!(samples.frequency(0b101), 1.0);
        // Qubit 0 leftmost: index 0b101 has qubits 0 and 2 set.
        assert_eq!(samples.bitstring(0b101), "101");
    }

    #[test]
    fn bitstring_roundtrip() {
        for j in 0..32u64 {
            let s = render_bitstring(j, 5);
            assert_eq!(parse_bitstring(&s).unwrap(), j);
        }
    }

    #[test]
    fn swap_exchanges_amplitudes() {
        let mut sv = StateVector::basis_state(2, 0b01).unwrap();
        sv.apply_gate(&GateOp::Swap { a: 0, b: 1 }).unwrap();
        assert!((sv.probability(0b10) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn depth_and_census_on_known_circuit() {
        let gates = vec![
            GateOp::H { q: 0 },
            GateOp::Cx { control: 0, target: 1 },
            GateOp::Cx { control: 1, target: 2 },
            GateOp::Rz { q: 0, theta: 0.3 },
        ];
        assert_eq!(cx_census(&gates), 2);
        // H → layer 1, CX01 → layer 2, CX12 → layer 3, Rz(q0) → layer 3.
        assert_eq!(circuit_depth(&gates), 3);
    }

    #[test]
    fn rejects_out_of_range_qubit() {
        let mut sv = StateVector::zero_state(2).unwrap();
        assert!(sv.apply_gate(&GateOp::X { q: 2 }).is_err());
        assert!(StateVector::zero_state(0).is_err());
        assert!(StateVector::zero_state(MAX_QUBITS + 1).is_err());
    }
}
