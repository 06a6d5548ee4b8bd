//! Flat dense tensor helpers shared by every module.
//!
//! Tensors are stored row-major in `Vec<f64>`. Matrices in ℝ^{d×N} use
//! index `i * n + j`; third-order tensors in ℝ^{d×N×N} use
//! `(i * n + j) * n + k`.
//!
//! Index convention for third-order tensors. A third-order tensor `T`
//! acts as a bilinear map `T(y, z)_i = Σ_{j,k} T_ijk y_j z_k`. When `T` is
//! the gradient of a matrix-valued field `U : ℝ^N → ℝ^{d×N}` the
//! differentiation index sits in the *middle* slot:
//! `T_ijk = ∂_j U_ik`, so that the affine field `U(y) = T(y, ·)` has
//! gradient `T`. For `U = ∇u` this is the usual Hessian
//! `T_ijk = ∂_j ∂_k u_i`, which is symmetric in `(j, k)`.
//!
//! Field storage (see [`crate::fields`]) always keeps the derivative index
//! last; [`slope_to_tensor3`] and [`tensor3_to_slope`] convert.

/// Frobenius norm of any flat tensor.
pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `e_k` in ℝ^n.
pub fn unit(n: usize, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[k] = 1.0;
    e
}

pub fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

/// `y = A x` for `A` of shape rows×cols.
pub fn matvec(a: &[f64], rows: usize, cols: usize, x: &[f64]) -> Vec<f64> {
    (0..rows).map(|i| (0..cols).map(|j| a[i * cols + j] * x[j]).sum()).collect()
}

/// Column `j` of a rows×cols matrix.
pub fn column(a: &[f64], rows: usize, cols: usize, j: usize) -> Vec<f64> {
    (0..rows).map(|i| a[i * cols + j]).collect()
}

/// Outer product `a ⊗ b`.
pub fn outer(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

/// Derivative-last slope of a matrix field (`[i][k][j] = ∂_j U_ik`) to the
/// middle-slot tensor convention (`[i][j][k]`).
pub fn slope_to_tensor3(slope: &[f64], d: usize, n: usize) -> Vec<f64> {
    let mut t = vec![0.0; d * n * n];
    for i in 0..d {
        for k in 0..n {
            for j in 0..n {
                t[(i * n + j) * n + k] = slope[(i * n + k) * n + j];
            }
        }
    }
    t
}

/// Inverse of [`slope_to_tensor3`].
pub fn tensor3_to_slope(t: &[f64], d: usize, n: usize) -> Vec<f64> {
    let mut s = vec![0.0; d * n * n];
    for i in 0..d {
        for j in 0..n {
            for k in 0..n {
                s[(i * n + k) * n + j] = t[(i * n + j) * n + k];
            }
        }
    }
    s
}

/// Orthonormal frame `R` (row-major N×N, det = +1 for N ≥ 2) with
/// `R e_N = ν`. Local coordinates `z` map to physical ones by `x = R z`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    n: usize,
    r: Vec<f64>,
}

impl Frame {
    pub fn identity(n: usize) -> Self {
        Self { n, r: identity(n) }
    }

    /// Householder reflection taking `e_N` to `ν`, composed with a flip of
    /// the first axis so the result is a proper rotation.
    pub fn aligned_to(nu: &[f64]) -> Self {
        let n = nu.len();
        let len = norm(nu);
        let nu: Vec<f64> = nu.iter().map(|v| v / len).collect();
        let mut w = unit(n, n - 1);
        for (wi, vi) in w.iter_mut().zip(&nu) {
            *wi -= vi;
        }
        let ww = dot(&w, &w);
        if ww < 1e-30 {
            return Self::identity(n);
        }
        let mut r = identity(n);
        for i in 0..n {
            for j in 0..n {
                r[i * n + j] -= 2.0 * w[i] * w[j] / ww;
            }
        }
        if n >= 2 {
            for i in 0..n {
                r[i * n] = -r[i * n];
            }
        }
        Self { n, r }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &[f64] {
        &self.r
    }

    pub fn to_physical(&self, z: &[f64]) -> Vec<f64> {
        matvec(&self.r, self.n, self.n, z)
    }

    pub fn to_local(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n).map(|j| (0..n).map(|i| self.r[i * n + j] * x[i]).sum()).collect()
    }

    /// Re-express a derivative-last slope (`[..][l]` = ∂/∂z_l) in physical
    /// derivatives `∂/∂x_j = Σ_l R_jl ∂/∂z_l`.
    pub fn slope_to_physical(&self, slope: &[f64]) -> Vec<f64> {
        let n = self.n;
        let m = slope.len() / n;
        let mut out = vec![0.0; slope.len()];
        for c in 0..m {
            for j in 0..n {
                out[c * n + j] = (0..n).map(|l| self.r[j * n + l] * slope[c * n + l]).sum();
            }
        }
        out
    }
}
