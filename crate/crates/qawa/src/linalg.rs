//! Dense linear algebra on the small matrices this crate actually needs:
//! complex 2×2 / 4×4 blocks for gates, and real symmetric n×n matrices for
//! covariance work. Everything is written out directly — the sizes involved
//! never justify a general-purpose library, and keeping the arithmetic in
//! plain loops makes the numerics easy to audit.

use num_complex::Complex64;

pub type C64 = Complex64;

pub const ZERO_C: C64 = C64::new(0.0, 0.0);
pub const ONE_C: C64 = C64::new(1.0, 0.0);
pub const I_C: C64 = C64::new(0.0, 1.0);

/// Complex 2×2 matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

/// Complex 4×4 matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat4(pub [[C64; 4]; 4]);

impl Mat2 {
    pub fn identity() -> Self {
        Mat2([[ONE_C, ZERO_C], [ZERO_C, ONE_C]])
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let mut out = [[ZERO_C; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                let mut acc = ZERO_C;
                for k in 0..2 {
                    acc += self.0[r][k] * rhs.0[k][c];
                }
                out[r][c] = acc;
            }
        }
        Mat2(out)
    }

    pub fn adjoint(&self) -> Mat2 {
        let mut out = [[ZERO_C; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] = self.0[c][r].conj();
            }
        }
        Mat2(out)
    }

    pub fn sub(&self, rhs: &Mat2) -> Mat2 {
        let mut out = [[ZERO_C; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] = self.0[r][c] - rhs.0[r][c];
            }
        }
        Mat2(out)
    }

    pub fn scale(&self, s: C64) -> Mat2 {
        let mut out = self.0;
        for row in out.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        Mat2(out)
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let p = self.adjoint().mul(self);
        let id = Mat2::identity();
        for r in 0..2 {
            for c in 0..2 {
                if (p.0[r][c] - id.0[r][c]).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Largest singular value, via power iteration on M†M.
    pub fn spectral_norm(&self) -> f64 {
        spectral_norm_impl(&|v: &[C64; 4]| {
            // Treat v's first two entries as the vector; pad unused.
            let x = [v[0], v[1]];
            let mut y = [ZERO_C; 2];
            for r in 0..2 {
                for c in 0..2 {
                    y[r] += self.0[r][c] * x[c];
                }
            }
            let a = self.adjoint();
            let mut z = [ZERO_C; 2];
            for r in 0..2 {
                for c in 0..2 {
                    z[r] += a.0[r][c] * y[c];
                }
            }
            [z[0], z[1], ZERO_C, ZERO_C]
        })
    }
}

impl Mat4 {
    pub fn identity() -> Self {
        let mut m = [[ZERO_C; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = ONE_C;
        }
        Mat4(m)
    }

    pub fn mul(&self, rhs: &Mat4) -> Mat4 {
        let mut out = [[ZERO_C; 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                let mut acc = ZERO_C;
                for k in 0..4 {
                    acc += self.0[r][k] * rhs.0[k][c];
                }
                out[r][c] = acc;
            }
        }
        Mat4(out)
    }

    pub fn adjoint(&self) -> Mat4 {
        let mut out = [[ZERO_C; 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                out[r][c] = self.0[c][r].conj();
            }
        }
        Mat4(out)
    }

    pub fn sub(&self, rhs: &Mat4) -> Mat4 {
        let mut out = [[ZERO_C; 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                out[r][c] = self.0[r][c] - rhs.0[r][c];
            }
        }
        Mat4(out)
    }

    pub fn scale(&self, s: C64) -> Mat4 {
        let mut out = self.0;
        for row in out.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        Mat4(out)
    }

    /// Kronecker product a ⊗ b: the matrix's two index bits are
    /// (high bit ← a's wire, low bit ← b's wire).
    pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
        let mut out = [[ZERO_C; 4]; 4];
        for ra in 0..2 {
            for ca in 0..2 {
                for rb in 0..2 {
                    for cb in 0..2 {
                        out[2 * ra + rb][2 * ca + cb] = a.0[ra][ca] * b.0[rb][cb];
                    }
                }
            }
        }
        Mat4(out)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let p = self.adjoint().mul(self);
        let id = Mat4::identity();
        for r in 0..4 {
            for c in 0..4 {
                if (p.0[r][c] - id.0[r][c]).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn max_abs_diff(&self, rhs: &Mat4) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..4 {
            for c in 0..4 {
                worst = worst.max((self.0[r][c] - rhs.0[r][c]).norm());
            }
        }
        worst
    }

    /// Largest singular value, via power iteration on M†M.
    pub fn spectral_norm(&self) -> f64 {
        let a = self.adjoint();
        spectral_norm_impl(&|v: &[C64; 4]| {
            let mut y = [ZERO_C; 4];
            for r in 0..4 {
                for c in 0..4 {
                    y[r] += self.0[r][c] * v[c];
                }
            }
            let mut z = [ZERO_C; 4];
            for r in 0..4 {
                for c in 0..4 {
                    z[r] += a.0[r][c] * y[c];
                }
            }
            z
        })
    }
}

/// Power iteration for the top eigenvalue of the Hermitian PSD map v ↦ M†Mv.
/// The start vector has unequal deterministic entries so it is never
/// orthogonal to the leading eigenspace in practice; near-degenerate spectra
/// are benign because the Rayleigh quotient converges to the top eigenvalue
/// regardless of which mixture the iterate settles into.
fn spectral_norm_impl(apply: &dyn Fn(&[C64; 4]) -> [C64; 4]) -> f64 {
    let mut v = [
        C64::new(1.0, 0.3),
        C64::new(-0.7, 0.9),
        C64::new(0.4, -1.1),
        C64::new(0.2, 0.8),
    ];
    let mut lambda = 0.0f64;
    for _ in 0..500 {
        let w = apply(&v);
        let norm: f64 = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return 0.0;
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
        lambda = norm;
    }
    lambda.sqrt()
}

/// Eigenvalues of a real symmetric matrix by the cyclic Jacobi method.
/// Returns them sorted ascending. Cost is irrelevant at the sizes used here
/// (covariance matrices of at most a few dozen assets).
pub fn sym_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let (vals, _) = sym_eigen(a);
    vals
}

/// Full symmetric eigendecomposition (values ascending, vectors as columns).
pub fn sym_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i][j] * m[i][j];
            }
        }
        if off.sqrt() < 1e-14 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i][i].partial_cmp(&m[j][j]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| m[i][i]).collect();
    let vecs: Vec<Vec<f64>> = (0..n)
        .map(|r| order.iter().map(|&c| v[r][c]).collect())
        .collect();
    (vals, vecs)
}

/// Square-root factor F of a symmetric PSD matrix, F·Fᵀ = A, built from the
/// eigendecomposition with negative eigenvalues clipped to zero. Handles
/// rank-deficient matrices (perfect correlation) that a Cholesky would reject.
pub fn sym_sqrt_factor(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let (vals, vecs) = sym_eigen(a);
    let mut f = vec![vec![0.0; n]; n];
    for (j, &lam) in vals.iter().enumerate() {
        let s = lam.max(0.0).sqrt();
        for (i, row) in f.iter_mut().enumerate() {
            row[j] = vecs[i][j] * s;
        }
    }
    f
}

/// y = F·x for a dense square matrix.
pub fn mat_vec(f: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    f.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}
