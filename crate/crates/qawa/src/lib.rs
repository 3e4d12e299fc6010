//! Quantum approximate walk library: QAOA over portfolio QUBOs, mid-circuit
//! weighted-sum arithmetic, coin-driven Bayesian mixing, and copula-based
//! statistical validation — all on a dense statevector simulator with
//! deterministic, stream-keyed randomness.
//!
//! Conventions used throughout (documented once here, relied on everywhere):
//!
//! * **Qubit order**: little-endian. Bit `q` of a basis index is qubit `q`;
//!   bitstring text renders qubit 0 leftmost.
//! * **Rotations**: `R_a(θ) = exp(−iθA/2)`.
//! * **Spins**: the portfolio layer maps bit `b → 2b − 1`; the measurement
//!   layer maps outcome `m → 1 − 2m` (so |0⟩ ↦ +1, the Z eigenvalue). Each
//!   module states which map it uses.
//! * **Randomness**: every stochastic routine takes an [`rng::RngStream`],
//!   keyed by `(seed, stream)`; identical keys replay identical draws.

pub mod arith;
pub mod cli_config;
pub mod copula;
pub mod distributed;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod metrics;
pub mod oracle;
pub mod problem;
pub mod qaoa;
pub mod rng;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
