//! Dependence-structure estimation: empirical copulas from measurement
//! samples, Gaussian ground-truth copulas, divergence/distance metrics, and
//! the concentration bound tying sample count to estimation error.
//!
//! Binary measurement outcomes make raw ranks massively tied, so
//! pseudo-observations break ties with seeded uniform jitter per variable:
//! sample k of variable i gets rank r by sorting on (value, jitter) and the
//! pseudo-observation (r + ½)/N. The jitter stream is derived per variable
//! index, which makes estimates deterministic in the seed and exactly
//! invariant under strictly increasing transforms of any variable (the
//! tie pattern, and hence the jittered ranks, cannot change).
//!
//! Copula grids are stored on the closed lattice {0, 1/G, …, 1}²; cell
//! densities carry additive smoothing 1/(N·G²) so divergence computations
//! never meet an empty cell.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sym_eigenvalues, sym_sqrt_factor};
use crate::rng::RngStream;
use crate::sim::SampleSet;
use crate::stats::{normal_cdf, normal_quantile, pearson};

/// Right-continuous empirical step CDF of one variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalCdf {
    /// Sorted distinct support points.
    pub support: Vec<f64>,
    /// Cumulative probability at each support point; ends at 1.
    pub cumulative: Vec<f64>,
}

impl MarginalCdf {
    /// F(t): cumulative mass of support points ≤ t.
    pub fn evaluate(&self, t: f64) -> f64 {
        let idx = self.support.partition_point(|s| *s <= t);
        if idx == 0 {
            0.0
        } else {
            self.cumulative[idx - 1]
        }
    }
}

/// Empirical marginal from raw values: F(t) = (1/N)·#{x ≤ t}.
pub fn empirical_cdf(values: &[f64]) -> Result<MarginalCdf> {
    if values.is_empty() {
        return Err(Error::invalid("empirical CDF needs at least one observation"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("observations must be finite"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values compare"));
    let n = sorted.len() as f64;
    let mut support = Vec::new();
    let mut cumulative = Vec::new();
    let mut seen = 0usize;
    let mut i = 0usize;
    while i < sorted.len() {
        let v = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == v {
            j += 1;
        }
        seen += j - i;
        support.push(v);
        cumulative.push(seen as f64 / n);
        i = j;
    }
    // Exact normalization at the top of the support.
    if let Some(last) = cumulative.last_mut() {
        *last = 1.0;
    }
    Ok(MarginalCdf { support, cumulative })
}

/// Empirical marginal of one measured bit.
pub fn empirical_cdf_from_samples(samples: &SampleSet, i: usize) -> Result<MarginalCdf> {
    if i >= samples.n_qubits() {
        return Err(Error::invalid(format!("variable {i} outside a {}-bit register", samples.n_qubits())));
    }
    empirical_cdf(&bit_columns(samples)?[i])
}

/// Whether an estimate covers the full joint (two variables) or all
/// two-variable projections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CopulaMode {
    Joint,
    Pairwise,
}

/// One pairwise copula estimate on the closed (G+1)×(G+1) lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopulaPanel {
    pub var_a: usize,
    pub var_b: usize,
    /// cdf[a][b] = Ĉ(a/G, b/G).
    pub cdf: Vec<Vec<f64>>,
    /// G×G smoothed cell masses; sums to 1.
    pub density: Vec<Vec<f64>>,
}

/// Empirical copula estimate: one panel in joint mode (two variables), all
/// unordered pairs in pairwise mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCopula {
    pub n_vars: usize,
    pub grid: usize,
    pub mode: CopulaMode,
    pub panels: Vec<CopulaPanel>,
    /// Variables whose observed values were constant; their ranks are pure
    /// jitter, making the corresponding axes uniform-independent.
    pub degenerate_vars: Vec<usize>,
}

impl EmpiricalCopula {
    /// Grounded (zero on the u=0 and v=0 edges), normalized at (1,1), and
    /// coordinatewise nondecreasing — each within 1e-9 on the lattice.
    pub fn verify_axioms(&self) -> Result<()> {
        for panel in &self.panels {
            let g = self.grid;
            let c = &panel.cdf;
            for a in 0..=g {
                if c[a][0].abs() > 1e-9 || c[0][a].abs() > 1e-9 {
                    return Err(Error::numeric("copula not grounded at a zero edge"));
                }
            }
            if (c[g][g] - 1.0).abs() > 1e-9 {
                return Err(Error::numeric(format!("copula corner value {} ≠ 1", c[g][g])));
            }
            for a in 0..=g {
                for b in 1..=g {
                    if c[a][b] < c[a][b - 1] - 1e-9 || c[b][a] < c[b - 1][a] - 1e-9 {
                        return Err(Error::numeric("copula decreasing along an axis"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Copula grid rows as CSV: `var_a,var_b,u,v,cdf,density`, densities of
    /// the cell whose upper-right corner is the node (zero on lower edges).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("var_a,var_b,u,v,cdf,density\n");
        let g = self.grid;
        for panel in &self.panels {
            for a in 0..=g {
                for b in 0..=g {
                    let dens = if a == 0 || b == 0 { 0.0 } else { panel.density[a - 1][b - 1] };
                    out.push_str(&format!(
                        "{},{},{:.6},{:.6},{:.9},{:.9}\n",
                        panel.var_a,
                        panel.var_b,
                        a as f64 / g as f64,
                        b as f64 / g as f64,
                        panel.cdf[a][b],
                        dens
                    ));
                }
            }
        }
        out
    }
}

/// Per-shot bit values of every qubit, in deterministic (basis-sorted) shot
/// order. Joint structure across variables is preserved shot-for-shot.
fn bit_columns(samples: &SampleSet) -> Result<Vec<Vec<f64>>> {
    let n = samples.n_qubits();
    if n == 0 || samples.shots() == 0 {
        return Err(Error::invalid("need a nonempty sample set"));
    }
    let mut columns = vec![Vec::with_capacity(samples.shots() as usize); n];
    for (&basis, &count) in samples.counts() {
        for _ in 0..count {
            for (i, col) in columns.iter_mut().enumerate() {
                col.push(((basis >> i) & 1) as f64);
            }
        }
    }
    Ok(columns)
}

/// Jittered pseudo-observations (r + ½)/N per variable, plus the indices of
/// variables whose values were constant. The jitter stream for variable i
/// is `rng.child(i)`, drawn in shot order, so estimates are deterministic
/// and identical under any strictly increasing per-variable transform.
pub fn pseudo_observations(columns: &[Vec<f64>], rng: &RngStream) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    let Some(first) = columns.first() else {
        return Err(Error::invalid("need at least one variable"));
    };
    let n = first.len();
    if n < 2 {
        return Err(Error::invalid("need at least two observations per variable"));
    }
    if columns.iter().any(|c| c.len() != n) {
        return Err(Error::invalid("variables must have equal observation counts"));
    }
    let mut pseudo = Vec::with_capacity(columns.len());
    let mut degenerate = Vec::new();
    for (i, col) in columns.iter().enumerate() {
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("variable {i} contains a non-finite value")));
        }
        let mut jitter_rng = rng.child(i as u64);
        let jitter: Vec<f64> = (0..n).map(|_| jitter_rng.uniform()).collect();
        let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if lo == hi {
            degenerate.push(i);
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            col[a]
                .partial_cmp(&col[b])
                .expect("finite values compare")
                .then(jitter[a].partial_cmp(&jitter[b]).expect("jitter is finite"))
        });
        let mut u = vec![0.0f64; n];
        for (rank, &k) in order.iter().enumerate() {
            u[k] = (rank as f64 + 0.5) / n as f64;
        }
        pseudo.push(u);
    }
    Ok((pseudo, degenerate))
}

fn build_panel(u: &[f64], v: &[f64], var_a: usize, var_b: usize, grid: usize) -> CopulaPanel {
    let g = grid;
    let n = u.len();
    let mut counts = vec![vec![0u64; g]; g];
    for (&ua, &vb) in u.iter().zip(v) {
        let a = ((ua * g as f64) as usize).min(g - 1);
        let b = ((vb * g as f64) as usize).min(g - 1);
        counts[a][b] += 1;
    }
    // Closed-lattice CDF by 2-D prefix sums of raw cell counts.
    let mut cdf = vec![vec![0.0f64; g + 1]; g + 1];
    for a in 1..=g {
        let mut row_acc = 0.0;
        for b in 1..=g {
            row_acc += counts[a - 1][b - 1] as f64;
            cdf[a][b] = cdf[a - 1][b] + row_acc / n as f64;
        }
    }
    // Exact corner normalization (prefix sums accumulate rounding).
    cdf[g][g] = 1.0;
    let smoothing = 1.0 / (n as f64 * (g * g) as f64);
    let total = n as f64 + smoothing * (g * g) as f64;
    let density = counts
        .iter()
        .map(|row| row.iter().map(|&c| (c as f64 + smoothing) / total).collect())
        .collect();
    CopulaPanel { var_a, var_b, cdf, density }
}

/// Empirical copula of raw (continuous or tied) data columns.
pub fn empirical_copula_from_columns(
    columns: &[Vec<f64>],
    mode: CopulaMode,
    grid: usize,
    rng: &RngStream,
) -> Result<EmpiricalCopula> {
    if columns.len() < 2 {
        return Err(Error::invalid("copula estimation needs at least two variables"));
    }
    if !(2..=2000).contains(&grid) {
        return Err(Error::invalid("grid resolution must lie in 2..=2000"));
    }
    if mode == CopulaMode::Joint && columns.len() != 2 {
        return Err(Error::invalid("joint mode stores a full grid and is limited to two variables; use pairwise mode"));
    }
    let (pseudo, degenerate_vars) = pseudo_observations(columns, rng)?;
    let pairs: Vec<(usize, usize)> = match mode {
        CopulaMode::Joint => vec![(0, 1)],
        CopulaMode::Pairwise => {
            let n = columns.len();
            (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect()
        }
    };
    let panels = pairs
        .into_iter()
        .map(|(i, j)| build_panel(&pseudo[i], &pseudo[j], i, j, grid))
        .collect();
    let copula = EmpiricalCopula { n_vars: columns.len(), grid, mode, panels, degenerate_vars };
    copula.verify_axioms()?;
    Ok(copula)
}

/// Empirical copula of a measured register, one variable per qubit.
pub fn empirical_copula(
    samples: &SampleSet,
    mode: CopulaMode,
    grid: usize,
    rng: &RngStream,
) -> Result<EmpiricalCopula> {
    empirical_copula_from_columns(&bit_columns(samples)?, mode, grid, rng)
}

/// Correlation-matrix specification of a Gaussian copula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianCopulaSpec {
    pub r: Vec<Vec<f64>>,
}

impl GaussianCopulaSpec {
    pub fn new(r: Vec<Vec<f64>>) -> Result<Self> {
        let n = r.len();
        if n == 0 || r.iter().any(|row| row.len() != n) {
            return Err(Error::invalid("correlation matrix must be square and nonempty"));
        }
        for i in 0..n {
            if (r[i][i] - 1.0).abs() > 1e-12 {
                return Err(Error::invalid("correlation matrix needs a unit diagonal"));
            }
            for j in 0..n {
                if (r[i][j] - r[j][i]).abs() > 1e-10 {
                    return Err(Error::invalid(format!("correlation matrix asymmetric at ({i},{j})")));
                }
                if r[i][j].abs() > 1.0 + 1e-12 {
                    return Err(Error::invalid(format!("correlation entry {} out of range", r[i][j])));
                }
            }
        }
        if let Some(min) = sym_eigenvalues(&r).first() {
            if *min < -1e-8 {
                return Err(Error::invalid(format!("correlation matrix not PSD: min eigenvalue {min}")));
            }
        }
        Ok(GaussianCopulaSpec { r })
    }

    pub fn bivariate(rho: f64) -> Result<Self> {
        Self::new(vec![vec![1.0, rho], vec![rho, 1.0]])
    }

    pub fn n_vars(&self) -> usize {
        self.r.len()
    }

    pub fn rho(&self, i: usize, j: usize) -> f64 {
        self.r[i][j]
    }

    /// Bivariate margin of variables (i, j); Gaussian copulas are closed
    /// under taking margins with the sub-correlation.
    pub fn marginal_pair(&self, i: usize, j: usize) -> Result<GaussianCopulaSpec> {
        if i >= self.n_vars() || j >= self.n_vars() || i == j {
            return Err(Error::invalid("pair indices must be distinct and in range"));
        }
        Self::bivariate(self.r[i][j])
    }

    /// One latent-uniform sample u = Φ(Lξ) with LLᵀ = R.
    pub fn sample_uniform(&self, rng: &mut RngStream) -> Vec<f64> {
        let l = sym_sqrt_factor(&self.r);
        let xi: Vec<f64> = (0..self.n_vars()).map(|_| rng.normal(0.0, 1.0)).collect();
        l.iter()
            .map(|row| normal_cdf(row.iter().zip(&xi).map(|(a, b)| a * b).sum()))
            .collect()
    }
}

/// Monte-Carlo estimate of the bivariate Gaussian copula CDF
/// C(u,v) = P[Z₁ ≤ Φ⁻¹(u), Z₂ ≤ Φ⁻¹(v)] with corr(Z₁,Z₂) = ρ = R₀₁.
/// Returns the estimate and its binomial standard error. Edges are exact:
/// zero at u·v = 0 and the uniform margins C(u,1) = u, C(1,v) = v.
pub fn gaussian_copula_cdf(
    spec: &GaussianCopulaSpec,
    u: [f64; 2],
    samples_mc: u64,
    rng: &mut RngStream,
) -> Result<(f64, f64)> {
    if spec.n_vars() != 2 {
        return Err(Error::invalid("copula CDF evaluation expects a bivariate spec; take a marginal pair first"));
    }
    let rho = spec.rho(0, 1);
    if rho.abs() >= 1.0 {
        return Err(Error::invalid("|ρ| = 1 is a degenerate (comonotone) copula"));
    }
    if samples_mc == 0 {
        return Err(Error::invalid("need at least one Monte-Carlo draw"));
    }
    let [pu, pv] = u;
    if !(0.0..=1.0).contains(&pu) || !(0.0..=1.0).contains(&pv) {
        return Err(Error::invalid("evaluation point must lie in the unit square"));
    }
    if pu == 0.0 || pv == 0.0 {
        return Ok((0.0, 0.0));
    }
    if pu == 1.0 {
        return Ok((pv, 0.0));
    }
    if pv == 1.0 {
        return Ok((pu, 0.0));
    }
    let a = normal_quantile(pu);
    let b = normal_quantile(pv);
    let tail = (1.0 - rho * rho).sqrt();
    let mut hits = 0u64;
    for _ in 0..samples_mc {
        let z1 = rng.normal(0.0, 1.0);
        let z2 = rho * z1 + tail * rng.normal(0.0, 1.0);
        if z1 <= a && z2 <= b {
            hits += 1;
        }
    }
    let p = hits as f64 / samples_mc as f64;
    let se = (p * (1.0 - p) / samples_mc as f64).sqrt();
    Ok((p, se))
}

/// Kullback–Leibler divergence Σ p·ln(p/q) between two gridded cell-mass
/// tables on the same shape. Both must be normalized; q must carry mass
/// wherever p does (apply smoothing upstream).
pub fn kl_divergence(p: &[Vec<f64>], q: &[Vec<f64>]) -> Result<f64> {
    if p.len() != q.len() || p.iter().zip(q).any(|(a, b)| a.len() != b.len()) {
        return Err(Error::invalid("density grids must share a shape"));
    }
    let (mut sp, mut sq) = (0.0f64, 0.0f64);
    let mut kl = 0.0f64;
    for (pr, qr) in p.iter().zip(q) {
        for (&pv, &qv) in pr.iter().zip(qr) {
            if pv < 0.0 || qv < 0.0 {
                return Err(Error::invalid("densities must be nonnegative"));
            }
            sp += pv;
            sq += qv;
            if pv > 0.0 {
                if qv == 0.0 {
                    return Err(Error::invalid("q vanishes where p has mass; smooth q first"));
                }
                kl += pv * (pv / qv).ln();
            }
        }
    }
    if (sp - 1.0).abs() > 1e-6 || (sq - 1.0).abs() > 1e-6 {
        return Err(Error::invalid(format!("densities must be normalized (got {sp} and {sq})")));
    }
    Ok(kl.max(0.0))
}

/// Grid-average L1 distance between copula CDFs: the discretization of
/// ∫|C₁ − C₂| du dv, averaged over panels when both are pairwise.
pub fn copula_distance(c1: &EmpiricalCopula, c2: &EmpiricalCopula) -> Result<f64> {
    if c1.grid != c2.grid || c1.n_vars != c2.n_vars || c1.panels.len() != c2.panels.len() {
        return Err(Error::invalid("copulas must share grid, dimension, and panel layout"));
    }
    let g = c1.grid;
    let mut total = 0.0;
    for (p1, p2) in c1.panels.iter().zip(&c2.panels) {
        if (p1.var_a, p1.var_b) != (p2.var_a, p2.var_b) {
            return Err(Error::invalid("copula panels cover different variable pairs"));
        }
        let mut acc = 0.0;
        for a in 1..=g {
            for b in 1..=g {
                acc += (p1.cdf[a][b] - p2.cdf[a][b]).abs();
            }
        }
        total += acc / (g * g) as f64;
    }
    Ok(total / c1.panels.len() as f64)
}

/// Pearson correlation matrix of the measured bits.
pub fn pairwise_correlations(samples: &SampleSet) -> Result<Vec<Vec<f64>>> {
    let columns = bit_columns(samples)?;
    let n = columns.len();
    if samples.shots() < 2 {
        return Err(Error::invalid("correlation needs at least two shots"));
    }
    let mut m = vec![vec![1.0f64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let r = pearson(&columns[i], &columns[j]);
            if !r.is_finite() {
                return Err(Error::numeric(format!("zero variance at variable {i} or {j}")));
            }
            m[i][j] = r;
            m[j][i] = r;
        }
    }
    Ok(m)
}

/// Concentration bound on the empirical joint CDF over n binary variables:
/// P[sup|F̂ − F| > ε] ≤ 2ⁿ·exp(−2Kε²) for K samples.
pub fn dkw_bound(k: u64, eps: f64, n: u32) -> f64 {
    2f64.powi(n as i32) * (-2.0 * k as f64 * eps * eps).exp()
}

/// Joint CDF reconstruction F(x₁,x₂) = C(F₁(x₁), F₂(x₂)) for a joint-mode
/// estimate, interpolating the copula bilinearly between lattice nodes.
pub fn sklar_recompose(c: &EmpiricalCopula, marginals: &[MarginalCdf], x: &[f64]) -> Result<f64> {
    if c.mode != CopulaMode::Joint || c.n_vars != 2 {
        return Err(Error::invalid("recomposition needs a joint-mode two-variable estimate"));
    }
    if marginals.len() != 2 || x.len() != 2 {
        return Err(Error::invalid("need exactly two marginals and a two-coordinate point"));
    }
    let u = marginals[0].evaluate(x[0]);
    let v = marginals[1].evaluate(x[1]);
    let g = c.grid;
    let cdf = &c.panels[0].cdf;
    let lookup = |t: f64| -> (usize, f64) {
        let scaled = (t * g as f64).clamp(0.0, g as f64);
        let idx = (scaled.floor() as usize).min(g - 1);
        (idx, scaled - idx as f64)
    };
    let (ia, fa) = lookup(u);
    let (ib, fb) = lookup(v);
    let c00 = cdf[ia][ib];
    let c10 = cdf[ia + 1][ib];
    let c01 = cdf[ia][ib + 1];
    let c11 = cdf[ia + 1][ib + 1];
    Ok(c00 * (1.0 - fa) * (1.0 - fb) + c10 * fa * (1.0 - fb) + c01 * (1.0 - fa) * fb + c11 * fa * fb)
}

/// Closed-form orthant probability of the bivariate Gaussian copula at the
/// median: C(½, ½) = ¼ + arcsin(ρ)/(2π).
pub fn gaussian_median_orthant(rho: f64) -> f64 {
    0.25 + rho.asin() / (2.0 * PI)
}

fn standard_normal_pdf(z: f64) -> f64 {
    (-(z * z) / 2.0).exp() / (2.0 * PI).sqrt()
}

/// Composite Simpson rule with a subinterval count scaled to the segment
/// width (always even, at least 16), accurate far past the lattice
/// tolerances used here.
fn simpson<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let mut n = (((hi - lo) / 0.02).ceil() as usize).max(16);
    if n % 2 == 1 {
        n += 1;
    }
    let h = (hi - lo) / n as f64;
    let mut sum = f(lo) + f(hi);
    for k in 1..n {
        sum += f(lo + h * k as f64) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

/// Ground-truth bivariate Gaussian-copula panel on the closed lattice.
///
/// Interior nodes come from cumulative quadrature of the conditional
/// reduction C(u,v) = ∫_{−∞}^{Φ⁻¹(u)} φ(z)·Φ((Φ⁻¹(v) − ρz)/√(1−ρ²)) dz; the
/// edges take their exact values C(u,0) = 0, C(u,1) = u, C(0,v) = 0,
/// C(1,v) = v. Cell masses are the corner differences of that lattice,
/// floored at a tiny positive value and renormalized, so the density is
/// strictly positive (usable as the reference side of a KL divergence) and
/// sums to one.
pub fn gaussian_copula_grid(rho: f64, grid: usize, var_a: usize, var_b: usize) -> Result<CopulaPanel> {
    if !(2..=2000).contains(&grid) {
        return Err(Error::invalid("grid resolution must lie in 2..=2000"));
    }
    if !rho.is_finite() || rho.abs() >= 1.0 - 1e-9 {
        return Err(Error::invalid("gridded Gaussian copula needs |rho| < 1"));
    }
    let g = grid;
    let gf = g as f64;
    let s = (1.0 - rho * rho).sqrt();
    let mut cdf = vec![vec![0.0f64; g + 1]; g + 1];
    for b in 0..=g {
        cdf[g][b] = b as f64 / gf;
    }
    for a in 0..=g {
        cdf[a][g] = a as f64 / gf;
    }
    let za_nodes: Vec<f64> = (1..g).map(|a| normal_quantile(a as f64 / gf)).collect();
    for b in 1..g {
        let zb = normal_quantile(b as f64 / gf);
        let f = |z: f64| standard_normal_pdf(z) * normal_cdf((zb - rho * z) / s);
        let mut acc = 0.0;
        let mut lo = -9.0;
        for (i, &za) in za_nodes.iter().enumerate() {
            acc += simpson(&f, lo, za);
            cdf[i + 1][b] = acc;
            lo = za;
        }
    }
    let mut density = vec![vec![0.0f64; g]; g];
    let mut total = 0.0;
    for a in 0..g {
        for b in 0..g {
            let mass = (cdf[a + 1][b + 1] - cdf[a][b + 1] - cdf[a + 1][b] + cdf[a][b]).max(1e-300);
            density[a][b] = mass;
            total += mass;
        }
    }
    for row in density.iter_mut() {
        for m in row.iter_mut() {
            *m /= total;
        }
    }
    Ok(CopulaPanel { var_a, var_b, cdf, density })
}

/// The gridded Gaussian ground truth for every variable pair of a
/// correlation matrix, packaged for [`copula_distance`] and per-panel KL
/// comparisons against pairwise empirical estimates on the same lattice.
pub fn gaussian_copula_grid_pairwise(spec: &GaussianCopulaSpec, grid: usize) -> Result<EmpiricalCopula> {
    let n = spec.n_vars();
    if n < 2 {
        return Err(Error::invalid("pairwise grids need at least two variables"));
    }
    let mut panels = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            panels.push(gaussian_copula_grid(spec.rho(i, j), grid, i, j)?);
        }
    }
    Ok(EmpiricalCopula { n_vars: n, grid, mode: CopulaMode::Pairwise, panels, degenerate_vars: Vec::new() })
}
