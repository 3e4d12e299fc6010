//! Quantum arithmetic blocks: the product unitary, the weighted-sum unitary
//! and its cascade algebra, the X sign flip, SELU activation encode/decode,
//! and angle recovery from measurement counts.
//!
//! Wire convention: every 4×4 matrix here follows the simulator's row order
//! `2·b(q_high) + b(q_low)`. The *high* wire is the accumulator — the qubit
//! whose ⟨Z⟩ carries weight `w` and is read out after a sum block. The low
//! wire is the fresh input (weight `1 − w`).

use crate::error::{Error, Result};
use crate::linalg::{C64, Mat2, Mat4, ZERO_C};
use crate::rng::RngStream;
use crate::sim::{GateOp, SampleSet, StateVector};
use serde::{Deserialize, Serialize};

/// SELU scale constant λ.
pub const SELU_LAMBDA: f64 = 1.0507009873554804934193349852946;
/// SELU negative-branch constant α.
pub const SELU_ALPHA: f64 = 1.6732632423543772848170429916717;

/// λx for x > 0, λα(eˣ − 1) otherwise.
pub fn selu(x: f64) -> f64 {
    if x > 0.0 {
        SELU_LAMBDA * x
    } else {
        SELU_LAMBDA * SELU_ALPHA * (x.exp() - 1.0)
    }
}

/// dselu/dx; the kink at 0 takes the right-limit value λ.
pub fn selu_derivative(x: f64) -> f64 {
    if x > 0.0 {
        SELU_LAMBDA
    } else {
        SELU_LAMBDA * SELU_ALPHA * x.exp()
    }
}

/// Left edge of the domain where |selu| ≤ 1: ln(1 − 1/(λα)) ≈ −0.84117.
pub fn selu_domain_min() -> f64 {
    (1.0 - 1.0 / (SELU_LAMBDA * SELU_ALPHA)).ln()
}

/// Right edge of the domain where |selu| ≤ 1: 1/λ ≈ 0.95175.
pub fn selu_domain_max() -> f64 {
    1.0 / SELU_LAMBDA
}

/// α = arccos(1 − 2w), the rotation angle that realizes convex weight w.
pub fn weight_to_angle(w: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::invalid(format!("weight {w} outside [0,1]")));
    }
    Ok((1.0 - 2.0 * w).clamp(-1.0, 1.0).acos())
}

/// w = ½(1 − cos α), the inverse of [`weight_to_angle`].
pub fn weight_recovery(alpha: f64) -> f64 {
    0.5 * (1.0 - alpha.cos())
}

/// A convex weight with its precomputed rotation angle. The defining
/// relation is sin²(α/2) = w (equivalently cos α = 1 − 2w), α ∈ [0, π].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedSumGate {
    pub w: f64,
    pub alpha: f64,
}

impl WeightedSumGate {
    pub fn new(w: f64) -> Result<Self> {
        Ok(WeightedSumGate { w, alpha: weight_to_angle(w)? })
    }
}

/// U_prod = CX·(I ⊗ Rz(π/2)) — control on the high wire, Rz on the low wire
/// — equal to e^{−iπ/4}·[[1,0,0,0],[0,i,0,0],[0,0,0,i],[0,0,1,0]].
/// Conjugation sends Z_low to Z_high·Z_low, so a chain of these multiplies
/// expectation values.
pub fn u_prod_matrix() -> Mat4 {
    let g = C64::from_polar(1.0, -std::f64::consts::FRAC_PI_4);
    let i = C64::new(0.0, 1.0);
    let one = C64::new(1.0, 0.0);
    let mut m = [[ZERO_C; 4]; 4];
    m[0][0] = g * one;
    m[1][1] = g * i;
    m[2][3] = g * i;
    m[3][2] = g * one;
    Mat4(m)
}

/// U_sum(w) = [Ry(−α/2) ⊗ I]·CX_{low→high}·[Ry(α/2) ⊗ I]·U_prod, equal to
/// e^{−iπ/4}·[[1,0,0,0],[0,i√w,√(1−w),0],[0,0,0,i],[0,i√(1−w),−√w,0]].
/// Conjugation sends Z_high to w·Z_high + (1−w)·Z_low plus an off-diagonal
/// remainder that vanishes on states with real density matrices.
pub fn u_sum_matrix(w: f64) -> Result<Mat4> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::invalid(format!("weight {w} outside [0,1]")));
    }
    let g = C64::from_polar(1.0, -std::f64::consts::FRAC_PI_4);
    let i = C64::new(0.0, 1.0);
    let sw = w.sqrt();
    let cw = (1.0 - w).sqrt();
    let mut m = [[ZERO_C; 4]; 4];
    m[0][0] = g;
    m[1][1] = g * i * sw;
    m[1][2] = g * C64::new(cw, 0.0);
    m[2][3] = g * i;
    m[3][1] = g * i * cw;
    m[3][2] = g * C64::new(-sw, 0.0);
    Ok(Mat4(m))
}

/// The Table-row sign flip: X, sending ⟨Z⟩ to −⟨Z⟩.
pub fn u_flip_matrix() -> Mat2 {
    crate::sim::pauli_x()
}

/// One sum block as elementary gates — two CX plus three rotations — equal
/// to [`u_sum_matrix`] exactly, phase included: the Rz on the input wire
/// supplies the e^{∓iπ/4} phases and the paired Ry(±α/2), with
/// α = arccos(1−2w), turns the double rotation into the √w/√(1−w) mix.
pub fn sum_block_gates(w: f64, q_high: usize, q_low: usize) -> Result<Vec<GateOp>> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::invalid(format!("weight {w} outside [0,1]")));
    }
    if q_high == q_low {
        return Err(Error::invalid("block wires must differ"));
    }
    let alpha = (1.0 - 2.0 * w).clamp(-1.0, 1.0).acos();
    Ok(vec![
        GateOp::Rz { q: q_low, theta: std::f64::consts::FRAC_PI_2 },
        GateOp::Cx { control: q_high, target: q_low },
        GateOp::Ry { q: q_high, theta: alpha / 2.0 },
        GateOp::Cx { control: q_low, target: q_high },
        GateOp::Ry { q: q_high, theta: -alpha / 2.0 },
    ])
}

/// The whole cascade as elementary gates: block k couples the accumulator
/// (qubit 0, the high wire) with input qubit k+1.
pub fn cascade_gates(weights: &[f64]) -> Result<Vec<GateOp>> {
    let mut gates = Vec::with_capacity(5 * weights.len());
    for (k, &w) in weights.iter().enumerate() {
        gates.extend(sum_block_gates(w, 0, k + 1)?);
    }
    Ok(gates)
}

/// Primitive-gate realization of U_prod on (high, low): Rz(π/2) on the low
/// wire, then CX from high to low. One CX per block.
pub fn build_prod_block(q_high: usize, q_low: usize) -> Vec<GateOp> {
    vec![
        GateOp::Rz { q: q_low, theta: std::f64::consts::FRAC_PI_2 },
        GateOp::Cx { control: q_high, target: q_low },
    ]
}

/// Primitive-gate realization of U_sum(w) on (high, low): U_prod, then
/// Ry(α/2) on high, CX from low to high, Ry(−α/2) on high. Two CX per block.
pub fn build_sum_block(w: f64, q_high: usize, q_low: usize) -> Result<Vec<GateOp>> {
    let gate = WeightedSumGate::new(w)?;
    let mut ops = build_prod_block(q_high, q_low);
    ops.push(GateOp::Ry { q: q_high, theta: gate.alpha / 2.0 });
    ops.push(GateOp::Cx { control: q_low, target: q_high });
    ops.push(GateOp::Ry { q: q_high, theta: -gate.alpha / 2.0 });
    Ok(ops)
}

/// Full cascade over an (m)-value register: qubit 0 is the accumulator,
/// qubits 1..m carry the remaining inputs; block k applies U_sum(w_k) to
/// (0, k+1). `weights` has length m−1. Census: 2(m−1) CX gates.
pub fn build_cascade(weights: &[f64]) -> Result<Vec<GateOp>> {
    let mut ops = Vec::new();
    for (k, w) in weights.iter().enumerate() {
        ops.extend(build_sum_block(*w, 0, k + 1)?);
    }
    Ok(ops)
}

/// Product chain over qubits 0..n−1: U_prod on consecutive pairs (k, k+1)
/// with k the high wire. After the chain, ⟨Z_{n−1}⟩ equals the product of
/// all input ⟨Z_k⟩ for product-state inputs.
pub fn build_product_chain(n: usize) -> Vec<GateOp> {
    let mut ops = Vec::new();
    for k in 0..n.saturating_sub(1) {
        ops.extend(build_prod_block(k, k + 1));
    }
    ops
}

/// Exact convex combination through one weighted-sum block. The diagonal
/// two-qubit input with marginals ⟨Z_high⟩ = x1, ⟨Z_low⟩ = x2 is realized
/// as a probability-weighted average of basis-state runs (the simulator is
/// pure-state; diagonal mixtures are convex combinations of such runs).
/// Returns ⟨Z₀⟩ = w·x1 + (1−w)·x2 on the statevector path.
pub fn single_block_expectation(x1: f64, x2: f64, w: f64) -> Result<f64> {
    check_unit_interval_signed(x1, "x1")?;
    check_unit_interval_signed(x2, "x2")?;
    let u = u_sum_matrix(w)?;
    let p1 = [(1.0 + x1) / 2.0, (1.0 - x1) / 2.0];
    let p2 = [(1.0 + x2) / 2.0, (1.0 - x2) / 2.0];
    let mut acc = 0.0;
    for b_high in 0..2u64 {
        for b_low in 0..2u64 {
            let weight = p1[b_high as usize] * p2[b_low as usize];
            if weight == 0.0 {
                continue;
            }
            let mut sv = StateVector::basis_state(2, b_high | (b_low << 1))?;
            sv.apply_two(&u, 0, 1, &[])?;
            acc += weight * sv.expectation_z(0);
        }
    }
    Ok(acc)
}

/// Shot-based estimate of the same quantity: per shot, draw the input basis
/// state from the product marginals, run the block, measure qubit 0, and
/// average the eigenvalues 1−2m.
pub fn single_block_sampled(x1: f64, x2: f64, w: f64, shots: u64, rng: &mut RngStream) -> Result<f64> {
    check_unit_interval_signed(x1, "x1")?;
    check_unit_interval_signed(x2, "x2")?;
    if shots == 0 {
        return Err(Error::invalid("need at least one shot"));
    }
    let u = u_sum_matrix(w)?;
    let mut acc = 0.0;
    for _ in 0..shots {
        let b_high = u64::from(!rng.bernoulli((1.0 + x1) / 2.0));
        let b_low = u64::from(!rng.bernoulli((1.0 + x2) / 2.0));
        let mut sv = StateVector::basis_state(2, b_high | (b_low << 1))?;
        sv.apply_two(&u, 0, 1, &[])?;
        let rec = sv.measure_qubit(0, rng)?;
        acc += 1.0 - 2.0 * f64::from(rec.outcome);
    }
    Ok(acc / shots as f64)
}

fn check_unit_interval_signed(x: f64, name: &str) -> Result<()> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::invalid(format!("{name} = {x} outside [−1,1]")));
    }
    Ok(())
}

/// Cascade weights with their induced simplex coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeCoefficients {
    /// Block weights w_0 … w_{m−2}.
    pub weights: Vec<f64>,
    /// Effective convex coefficients over the m inputs; lives on Δ_{m−1}.
    pub effective: Vec<f64>,
}

/// Closed-form effective coefficients of the recursion
/// s_{k+1} = w_k·s_k + (1−w_k)·x_{k+1}:
/// effective[0] = Π_j w_j and effective[k] = (1−w_{k−1})·Π_{j≥k} w_j.
pub fn cascade_effective(weights: &[f64]) -> Result<CascadeCoefficients> {
    for w in weights {
        if !(0.0..=1.0).contains(w) {
            return Err(Error::invalid(format!("cascade weight {w} outside [0,1]")));
        }
    }
    let m = weights.len() + 1;
    let mut effective = vec![0.0f64; m];
    // Suffix products of the weights: suffix[k] = Π_{j≥k} w_j.
    let mut suffix = vec![1.0f64; weights.len() + 1];
    for k in (0..weights.len()).rev() {
        suffix[k] = suffix[k + 1] * weights[k];
    }
    effective[0] = suffix[0];
    for k in 1..m {
        effective[k] = (1.0 - weights[k - 1]) * suffix[k];
    }
    Ok(CascadeCoefficients { weights: weights.to_vec(), effective })
}

/// Invert the simplex map: given a target on Δ_{m−1}, return block weights
/// reproducing it. The triangular structure gives the exact solution
/// w_{k−1} = (Σ_{j<k} t_j)/(Σ_{j≤k} t_j); a zero denominator leaves that
/// weight free and 0.5 is chosen.
pub fn cascade_invert(target: &[f64]) -> Result<Vec<f64>> {
    let m = target.len();
    if m < 2 {
        return Err(Error::invalid("need at least two coefficients to invert"));
    }
    let sum: f64 = target.iter().sum();
    if target.iter().any(|t| *t < -1e-12) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::invalid("target is not on the simplex"));
    }
    let mut weights = vec![0.0f64; m - 1];
    let mut prefix = target[0];
    for k in 1..m {
        let denom = prefix + target[k];
        weights[k - 1] = if denom <= 0.0 { 0.5 } else { (prefix / denom).clamp(0.0, 1.0) };
        prefix = denom;
    }
    Ok(weights)
}

/// Classical reference recursion: s ← w_k·s + (1−w_k)·x_{k+1}, seeded with
/// s = x_0. Equals Σ effective[k]·x_k identically.
pub fn recursive_weighted_sum(xs: &[f64], weights: &[f64]) -> Result<f64> {
    if xs.is_empty() || xs.len() != weights.len() + 1 {
        return Err(Error::invalid("need one more input than weights"));
    }
    let mut s = xs[0];
    for (w, x) in weights.iter().zip(&xs[1..]) {
        if !(0.0..=1.0).contains(w) {
            return Err(Error::invalid(format!("weight {w} outside [0,1]")));
        }
        s = w * s + (1.0 - w) * x;
    }
    Ok(s)
}

/// SELU activation encoder with the global rescale constant A. Values pass
/// through selu(x/A) and are clamped to the arccos domain [−1, 1]; the
/// clamp is reported so callers can tell saturated encodings apart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivationEncoder {
    pub lambda_selu: f64,
    pub alpha_selu: f64,
    pub scale_a: f64,
    /// When false, out-of-domain values error instead of clamping.
    pub clamp: bool,
}

impl Default for ActivationEncoder {
    fn default() -> Self {
        ActivationEncoder { lambda_selu: SELU_LAMBDA, alpha_selu: SELU_ALPHA, scale_a: 1.0, clamp: true }
    }
}

impl ActivationEncoder {
    pub fn with_scale(scale_a: f64) -> Result<Self> {
        if scale_a <= 0.0 {
            return Err(Error::invalid("scale constant must be positive"));
        }
        Ok(ActivationEncoder { scale_a, ..ActivationEncoder::default() })
    }

    /// selu with this encoder's constants.
    pub fn activation(&self, x: f64) -> f64 {
        if x > 0.0 {
            self.lambda_selu * x
        } else {
            self.lambda_selu * self.alpha_selu * (x.exp() - 1.0)
        }
    }

    /// Slope of [`Self::activation`]; the kink at 0 takes the right
    /// derivative λ.
    pub fn activation_derivative(&self, x: f64) -> f64 {
        if x >= 0.0 {
            self.lambda_selu
        } else {
            self.lambda_selu * self.alpha_selu * x.exp()
        }
    }

    /// Activated value after rescaling, clamped into [−1, 1]; the flag says
    /// whether clamping changed the value.
    pub fn activated_value(&self, x: f64) -> Result<(f64, bool)> {
        let v = self.activation(x / self.scale_a);
        if (-1.0..=1.0).contains(&v) {
            Ok((v, false))
        } else if self.clamp {
            Ok((v.clamp(-1.0, 1.0), true))
        } else {
            Err(Error::invalid(format!("activated value {v} outside the arccos domain and clamping is off")))
        }
    }
}

/// θ = arccos(selu(x/A)); Ry(θ)|0⟩ then has ⟨Z⟩ = selu(x/A).
pub fn encode_activation(x: f64, enc: &ActivationEncoder) -> Result<f64> {
    let (v, _) = enc.activated_value(x)?;
    Ok(v.acos())
}

/// Same with the saturation flag exposed.
pub fn encode_activation_flagged(x: f64, enc: &ActivationEncoder) -> Result<(f64, bool)> {
    let (v, clamped) = enc.activated_value(x)?;
    Ok((v.acos(), clamped))
}

/// The decoding measurement: ⟨Z_q⟩ of the encoder qubit.
pub fn decode_expectation(state: &StateVector, q: usize) -> f64 {
    state.expectation_z(q)
}

/// Encode each x_k as a real single-qubit state with ⟨Z_k⟩ = x_k, run the
/// product chain, and read the last qubit: ⟨Z_{n−1}⟩ = Πx_k exactly. The
/// return value is the activation of that product (clamped per encoder).
pub fn activation_product_expectation(xs: &[f64], enc: &ActivationEncoder) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::invalid("need at least one factor"));
    }
    for x in xs {
        check_unit_interval_signed(*x, "factor")?;
    }
    let n = xs.len();
    let mut sv = StateVector::zero_state(n)?;
    for (k, x) in xs.iter().enumerate() {
        // Ry(θ)|0⟩ with cos θ = x gives ⟨Z⟩ = x and real amplitudes.
        sv.apply_gate(&GateOp::Ry { q: k, theta: x.clamp(-1.0, 1.0).acos() })?;
    }
    sv.apply_circuit(&build_product_chain(n))?;
    let product = sv.expectation_z(n - 1);
    let (v, _) = enc.activated_value(product * enc.scale_a)?;
    Ok(v)
}

/// Uniform-slot angle-encoded register: qubit 0 carries cos(α_k/2)|0⟩ +
/// sin(α_k/2)|1⟩ for slot k on the remaining qubits, uniformly weighted.
/// Slot count is padded to the next power of two; unused slots hold zero
/// amplitude.
pub fn angle_encoded_state(alphas: &[f64]) -> Result<StateVector> {
    if alphas.is_empty() {
        return Err(Error::invalid("need at least one angle"));
    }
    let k = alphas.len();
    let slot_qubits = (k.max(2)).next_power_of_two().trailing_zeros() as usize;
    let n = slot_qubits + 1;
    let mut amps = vec![ZERO_C; 1 << n];
    let norm = (k as f64).sqrt().recip();
    for (slot, alpha) in alphas.iter().enumerate() {
        if !(0.0..=std::f64::consts::PI).contains(alpha) {
            return Err(Error::invalid(format!("angle {alpha} outside [0, π]")));
        }
        amps[slot << 1] = C64::new(norm * (alpha / 2.0).cos(), 0.0);
        amps[(slot << 1) | 1] = C64::new(norm * (alpha / 2.0).sin(), 0.0);
    }
    StateVector::from_amplitudes(amps)
}

/// Angle estimates recovered from pair frequencies, with saturation flags
/// for slots where the even-index count was zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredAngles {
    pub alphas: Vec<f64>,
    pub saturated: Vec<bool>,
}

/// α̂_k = 2·arctan√(p_{2k+1}/p_{2k}) over consecutive index pairs; the pair
/// (2k, 2k+1) differs exactly in qubit 0. Slots with p_even = 0 return the
/// limit π (when p_odd > 0) or 0 (no mass at all), flagged either way.
pub fn recover_angles(samples: &SampleSet) -> Result<RecoveredAngles> {
    if samples.shots() == 0 {
        return Err(Error::invalid("empty sample set"));
    }
    let slots = 1usize << (samples.n_qubits() - 1);
    let mut alphas = Vec::with_capacity(slots);
    let mut saturated = Vec::with_capacity(slots);
    for k in 0..slots {
        let even = samples.frequency((k as u64) << 1);
        let odd = samples.frequency(((k as u64) << 1) | 1);
        if even <= 0.0 {
            alphas.push(if odd > 0.0 { std::f64::consts::PI } else { 0.0 });
            saturated.push(true);
        } else {
            alphas.push(2.0 * (odd / even).sqrt().atan());
            saturated.push(false);
        }
    }
    Ok(RecoveredAngles { alphas, saturated })
}

/// Delta-method variance of α̂ from a pair receiving `pair_shots` shots:
/// exactly 1/pair_shots, independent of the angle.
pub fn angle_recovery_variance(pair_shots: u64) -> f64 {
    1.0 / pair_shots as f64
}
