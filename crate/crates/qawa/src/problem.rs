//! Portfolio data ingestion, QUBO construction, the QUBO↔Ising map, and a
//! brute-force ground-truth oracle.
//!
//! Spin convention in this module: binary decision variable `x_i ∈ {0,1}`
//! maps to spin `z_i = 2x_i − 1` (bit set ⇒ spin +1). This is the portfolio
//! layer's map; the measurement layer elsewhere uses the Z-eigenvalue map
//! `m → 1 − 2m` and says so where it applies.

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::stats::{mean, sample_variance};
use serde::{Deserialize, Serialize};

/// Log-return rows per asset, columns are consecutive day pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnsMatrix {
    pub assets: Vec<String>,
    /// assets × days matrix of log returns.
    pub returns: Vec<Vec<f64>>,
}

impl ReturnsMatrix {
    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }

    pub fn n_days(&self) -> usize {
        self.returns.first().map_or(0, Vec::len)
    }
}

/// Mean/covariance/risk-aversion triple defining a portfolio instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortfolioSpec {
    pub mu: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
    pub lambda: f64,
}

impl PortfolioSpec {
    pub fn n_assets(&self) -> usize {
        self.mu.len()
    }

    /// Check symmetry (1e-10) and positive semidefiniteness (smallest
    /// eigenvalue ≥ −1e-8).
    pub fn validate(&self) -> Result<()> {
        let n = self.mu.len();
        if self.sigma.len() != n || self.sigma.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("mu and sigma dimensions disagree"));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::invalid(format!("lambda {} outside [0,1]", self.lambda)));
        }
        for i in 0..n {
            for j in 0..n {
                if (self.sigma[i][j] - self.sigma[j][i]).abs() > 1e-10 {
                    return Err(Error::invalid(format!("sigma asymmetric at ({i},{j})")));
                }
            }
        }
        let eigs = crate::linalg::sym_eigenvalues(&self.sigma);
        if let Some(min) = eigs.first() {
            if *min < -1e-8 {
                return Err(Error::invalid(format!("sigma not PSD: min eigenvalue {min}")));
            }
        }
        Ok(())
    }

    /// Seeded synthetic instance: expected returns uniform in [0.02, 0.12]
    /// and a correlation-like covariance C = (1−s)·I + s·vvᵀ-mixtures built
    /// from a random factor matrix, rescaled to unit diagonal. Deterministic
    /// in the stream.
    pub fn synthetic(n_assets: usize, rng: &mut RngStream) -> Result<Self> {
        if n_assets == 0 {
            return Err(Error::invalid("need at least one asset"));
        }
        let mu: Vec<f64> = (0..n_assets).map(|_| rng.uniform_in(0.02, 0.12)).collect();
        // Factor model: B is n×k, Σ₀ = BBᵀ + d·I, then normalize to unit diagonal.
        let k = (n_assets / 2).max(1);
        let b: Vec<Vec<f64>> = (0..n_assets)
            .map(|_| (0..k).map(|_| rng.normal(0.0, 1.0)).collect())
            .collect();
        let mut sigma = vec![vec![0.0f64; n_assets]; n_assets];
        for i in 0..n_assets {
            for j in 0..n_assets {
                let mut acc = 0.0;
                for t in 0..k {
                    acc += b[i][t] * b[j][t];
                }
                sigma[i][j] = acc;
            }
            sigma[i][i] += 0.5;
        }
        let scale: Vec<f64> = (0..n_assets).map(|i| sigma[i][i].sqrt()).collect();
        for i in 0..n_assets {
            for j in 0..n_assets {
                sigma[i][j] /= scale[i] * scale[j];
            }
        }
        let spec = PortfolioSpec { mu, sigma, lambda: 0.5 };
        spec.validate()?;
        Ok(spec)
    }
}

/// Symmetric QUBO matrix; the objective is xᵀQx over binary x.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuboProblem {
    pub q: Vec<Vec<f64>>,
}

impl QuboProblem {
    pub fn new(q: Vec<Vec<f64>>) -> Result<Self> {
        let n = q.len();
        if q.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("QUBO matrix must be square"));
        }
        for i in 0..n {
            for j in 0..n {
                if (q[i][j] - q[j][i]).abs() > 1e-10 {
                    return Err(Error::invalid(format!("QUBO asymmetric at ({i},{j})")));
                }
            }
        }
        Ok(QuboProblem { q })
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }
}

/// Ising form: couplings J (symmetric, zero diagonal), fields h, constant
/// offset. The energy sums each unordered pair once:
/// E(z) = Σ_{i<j} J_ij z_i z_j + Σ_i h_i z_i + offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingModel {
    pub j: Vec<Vec<f64>>,
    pub h: Vec<f64>,
    pub offset: f64,
}

impl IsingModel {
    pub fn n(&self) -> usize {
        self.h.len()
    }

    /// Energy of explicit spins z ∈ {−1,+1}ⁿ.
    pub fn energy_spins(&self, z: &[f64]) -> f64 {
        let n = self.h.len();
        let mut e = self.offset;
        for i in 0..n {
            e += self.h[i] * z[i];
            for jdx in (i + 1)..n {
                e += self.j[i][jdx] * z[i] * z[jdx];
            }
        }
        e
    }

    /// Energy of the basis index whose bit i is x_i, via z_i = 2x_i − 1.
    pub fn energy_bits(&self, bits: u64) -> f64 {
        let n = self.h.len();
        let z: Vec<f64> = (0..n).map(|i| if (bits >> i) & 1 == 1 { 1.0 } else { -1.0 }).collect();
        self.energy_spins(&z)
    }

    /// Energies of all 2ⁿ assignments, indexed by basis index.
    pub fn energy_table(&self) -> Vec<f64> {
        let n = self.h.len();
        (0..(1u64 << n)).map(|b| self.energy_bits(b)).collect()
    }
}

/// Row-wise log returns: returns[i][t] = ln(p[i][t+1]/p[i][t]).
pub fn log_returns(assets: Vec<String>, prices: &[Vec<f64>]) -> Result<ReturnsMatrix> {
    if prices.len() != assets.len() {
        return Err(Error::invalid("asset list and price rows disagree"));
    }
    let days = prices.first().map_or(0, Vec::len);
    if days < 2 {
        return Err(Error::invalid("need at least 2 days of prices"));
    }
    let mut returns = Vec::with_capacity(prices.len());
    for (i, row) in prices.iter().enumerate() {
        if row.len() != days {
            return Err(Error::invalid("ragged price matrix"));
        }
        let mut r = Vec::with_capacity(days - 1);
        for t in 0..days - 1 {
            if row[t] <= 0.0 || row[t + 1] <= 0.0 {
                return Err(Error::invalid(format!("nonpositive price for asset {i} near day {t}")));
            }
            r.push((row[t + 1] / row[t]).ln());
        }
        returns.push(r);
    }
    Ok(ReturnsMatrix { assets, returns })
}

/// Demean and scale each row to sample variance 1 (divisor N−1).
pub fn standardize(r: &ReturnsMatrix) -> Result<ReturnsMatrix> {
    let mut out = Vec::with_capacity(r.returns.len());
    for (i, row) in r.returns.iter().enumerate() {
        let m = mean(row);
        let v = sample_variance(row);
        if v <= 0.0 {
            return Err(Error::invalid(format!("zero-variance row for asset {i}")));
        }
        let s = v.sqrt();
        out.push(row.iter().map(|x| (x - m) / s).collect());
    }
    Ok(ReturnsMatrix { assets: r.assets.clone(), returns: out })
}

/// Sample covariance (divisor N−1) across rows of a returns matrix.
pub fn covariance_matrix(r: &ReturnsMatrix) -> Result<Vec<Vec<f64>>> {
    let n = r.n_assets();
    let d = r.n_days();
    if d < 2 {
        return Err(Error::invalid("need at least 2 observations for covariance"));
    }
    let means: Vec<f64> = r.returns.iter().map(|row| mean(row)).collect();
    let mut cov = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for t in 0..d {
                acc += (r.returns[i][t] - means[i]) * (r.returns[j][t] - means[j]);
            }
            let c = acc / (d as f64 - 1.0);
            cov[i][j] = c;
            cov[j][i] = c;
        }
    }
    Ok(cov)
}

/// H(x) = λ·xᵀΣx − (1−λ)·μᵀx as a QUBO: Q = λΣ with −(1−λ)μ folded onto
/// the diagonal (valid because x_i² = x_i).
pub fn build_portfolio_qubo(spec: &PortfolioSpec) -> Result<QuboProblem> {
    spec.validate()?;
    let n = spec.n_assets();
    let mut q = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in 0..n {
            q[i][j] = spec.lambda * spec.sigma[i][j];
        }
        q[i][i] -= (1.0 - spec.lambda) * spec.mu[i];
    }
    QuboProblem::new(q)
}

/// Substitute x = (z+1)/2 into xᵀQx. For symmetric Q:
/// J_ij = Q_ij/2 (i≠j), h_i = (Σ_j Q_ij)/2, offset = (ΣQ + tr Q)/4.
pub fn qubo_to_ising(qubo: &QuboProblem) -> Result<IsingModel> {
    let n = qubo.n();
    let q = &qubo.q;
    let mut j = vec![vec![0.0f64; n]; n];
    let mut h = vec![0.0f64; n];
    let mut total = 0.0;
    let mut trace = 0.0;
    for a in 0..n {
        let mut row = 0.0;
        for b in 0..n {
            row += q[a][b];
            total += q[a][b];
            if a != b {
                j[a][b] = q[a][b] / 2.0;
            }
        }
        trace += q[a][a];
        h[a] = row / 2.0;
    }
    Ok(IsingModel { j, h, offset: (total + trace) / 4.0 })
}

/// Exact quadratic form xᵀQx for the bitstring packed into `bits`.
pub fn evaluate(qubo: &QuboProblem, bits: u64, n: usize) -> Result<f64> {
    if n != qubo.n() {
        return Err(Error::invalid("bitstring length does not match QUBO size"));
    }
    let mut e = 0.0;
    for i in 0..n {
        if (bits >> i) & 1 == 0 {
            continue;
        }
        for j in 0..n {
            if (bits >> j) & 1 == 1 {
                e += qubo.q[i][j];
            }
        }
    }
    Ok(e)
}

/// Global minimum over all 2ⁿ assignments; ties break toward the lowest
/// binary value. Returns (bits, energy).
pub fn brute_force_optimum(qubo: &QuboProblem) -> Result<(u64, f64)> {
    let n = qubo.n();
    if n > crate::sim::MAX_QUBITS {
        return Err(Error::invalid(format!("brute force capped at {} variables", crate::sim::MAX_QUBITS)));
    }
    let mut best_bits = 0u64;
    let mut best = evaluate(qubo, 0, n)?;
    for bits in 1..(1u64 << n) {
        let e = evaluate(qubo, bits, n)?;
        if e < best {
            best = e;
            best_bits = bits;
        }
    }
    Ok((best_bits, best))
}

/// Global maximum over all 2ⁿ assignments (same tie rule).
pub fn brute_force_worst(qubo: &QuboProblem) -> Result<(u64, f64)> {
    let n = qubo.n();
    if n > crate::sim::MAX_QUBITS {
        return Err(Error::invalid(format!("brute force capped at {} variables", crate::sim::MAX_QUBITS)));
    }
    let mut worst_bits = 0u64;
    let mut worst = evaluate(qubo, 0, n)?;
    for bits in 1..(1u64 << n) {
        let e = evaluate(qubo, bits, n)?;
        if e > worst {
            worst = e;
            worst_bits = bits;
        }
    }
    Ok((worst_bits, worst))
}

/// Min-max normalized quality: (worst − energy)/(worst − optimum), so the
/// optimum scores 1 and the worst assignment 0. A degenerate spectrum
/// (worst = optimum) scores 1 by definition.
pub fn approximation_ratio(energy: f64, optimum: f64, worst: f64) -> f64 {
    let span = worst - optimum;
    if span.abs() < 1e-300 {
        return 1.0;
    }
    (worst - energy) / span
}

/// Parse a price CSV with header `date,TICKER1,TICKER2,...`, ISO-8601 dates,
/// one row per trading day, no missing values. Returns tickers and an
/// assets × days price matrix.
pub fn parse_price_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::invalid("empty price CSV"))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() < 2 || !cols[0].eq_ignore_ascii_case("date") {
        return Err(Error::invalid("price CSV header must be `date,TICKER1,...`"));
    }
    let tickers: Vec<String> = cols[1..].iter().map(|s| s.to_string()).collect();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != cols.len() {
            return Err(Error::invalid(format!("price CSV row {} has {} fields, expected {}", lineno + 2, fields.len(), cols.len())));
        }
        let date = fields[0];
        if date.len() != 10 || !date.chars().enumerate().all(|(i, c)| if i == 4 || i == 7 { c == '-' } else { c.is_ascii_digit() }) {
            return Err(Error::invalid(format!("row {}: date {date:?} is not ISO-8601 (YYYY-MM-DD)", lineno + 2)));
        }
        let mut row = Vec::with_capacity(tickers.len());
        for f in &fields[1..] {
            let v: f64 = f
                .parse()
                .map_err(|_| Error::invalid(format!("row {}: unparsable price {f:?}", lineno + 2)))?;
            row.push(v);
        }
        rows.push(row);
    }
    if rows.len() < 2 {
        return Err(Error::invalid("price CSV needs at least 2 trading days"));
    }
    // Transpose day-major rows into asset-major rows.
    let prices: Vec<Vec<f64>> = (0..tickers.len()).map(|i| rows.iter().map(|r| r[i]).collect()).collect();
    Ok((tickers, prices))
}
