//! Small exact tensor algebra for 3×3 symmetric and mixed-index tensors.
//!
//! Every value carries the [`Basis`] its components are expressed in. The
//! chart backend works in coordinate components, the homogeneous backend in
//! left-invariant frame components. Combining values from different bases is
//! a contract violation and trips a debug assertion.

use std::ops::{Add, Mul, Sub};

use thiserror::Error;

/// Each leading principal minor must exceed this fraction of the product of
/// its diagonal entries (an upper bound for the minor by Hadamard), so the
/// test is invariant under rescaling of the axes.
pub const DEFINITENESS_TOL: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("matrix is not positive definite: leading minor {order} = {value:e}")]
    NotPositiveDefinite { order: usize, value: f64 },
    #[error("odd_power requires an odd exponent, got {0}")]
    EvenPower(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    Coordinate,
    Frame,
}

#[inline]
fn check_basis(a: Basis, b: Basis) {
    debug_assert_eq!(a, b, "tensor basis mismatch");
}

/// Symmetric 3×3 tensor stored as `[a11, a12, a13, a22, a23, a33]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMat3 {
    pub c: [f64; 6],
    pub basis: Basis,
}

const IDX: [[usize; 3]; 3] = [[0, 1, 2], [1, 3, 4], [2, 4, 5]];

impl SymMat3 {
    pub const fn new(c: [f64; 6], basis: Basis) -> Self {
        Self { c, basis }
    }

    pub const fn zero(basis: Basis) -> Self {
        Self { c: [0.0; 6], basis }
    }

    pub const fn identity(basis: Basis) -> Self {
        Self { c: [1.0, 0.0, 0.0, 1.0, 0.0, 1.0], basis }
    }

    pub const fn diag(d: [f64; 3], basis: Basis) -> Self {
        Self { c: [d[0], 0.0, 0.0, d[1], 0.0, d[2]], basis }
    }

    /// Symmetric part of a full matrix.
    pub fn from_full(m: &[[f64; 3]; 3], basis: Basis) -> Self {
        let s = |i: usize, j: usize| 0.5 * (m[i][j] + m[j][i]);
        Self { c: [s(0, 0), s(0, 1), s(0, 2), s(1, 1), s(1, 2), s(2, 2)], basis }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.c[IDX[i][j]]
    }

    pub fn to_full(&self) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.get(i, j);
            }
        }
        m
    }

    pub fn diagonal(&self) -> [f64; 3] {
        [self.c[0], self.c[3], self.c[5]]
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { c: self.c.map(|v| v * s), basis: self.basis }
    }

    pub fn det(&self) -> f64 {
        let [a, b, c, d, e, f] = self.c;
        a * (d * f - e * e) - b * (b * f - c * e) + c * (b * e - c * d)
    }

    /// Leading principal minors of orders 1, 2, 3.
    pub fn leading_minors(&self) -> [f64; 3] {
        let [a, b, _, d, _, _] = self.c;
        [a, a * d - b * b, self.det()]
    }

    pub fn check_positive_definite(&self) -> Result<(), TensorError> {
        let [a, _, _, d, _, f] = self.c;
        let scale = [a, a * d, a * d * f];
        for (k, m) in self.leading_minors().into_iter().enumerate() {
            if !(m > DEFINITENESS_TOL * scale[k] && m.is_finite() && scale[k].is_normal()) {
                return Err(TensorError::NotPositiveDefinite { order: k + 1, value: m });
            }
        }
        Ok(())
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Frobenius norm of the component array (off-diagonals counted twice).
    pub fn frobenius(&self) -> f64 {
        let [a, b, c, d, e, f] = self.c;
        (a * a + d * d + f * f + 2.0 * (b * b + c * c + e * e)).sqrt()
    }
}

impl Add for SymMat3 {
    type Output = SymMat3;
    fn add(self, rhs: SymMat3) -> SymMat3 {
        check_basis(self.basis, rhs.basis);
        let mut c = self.c;
        for (x, y) in c.iter_mut().zip(rhs.c) {
            *x += y;
        }
        SymMat3 { c, basis: self.basis }
    }
}

impl Sub for SymMat3 {
    type Output = SymMat3;
    fn sub(self, rhs: SymMat3) -> SymMat3 {
        self + rhs.scale(-1.0)
    }
}

/// Mixed tensor `T^i_j`, stored row-major as `t[i][j]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mixed3 {
    pub t: [[f64; 3]; 3],
    pub basis: Basis,
}

impl Mixed3 {
    pub const fn new(t: [[f64; 3]; 3], basis: Basis) -> Self {
        Self { t, basis }
    }

    pub const fn zero(basis: Basis) -> Self {
        Self { t: [[0.0; 3]; 3], basis }
    }

    pub const fn identity(basis: Basis) -> Self {
        Self { t: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], basis }
    }

    pub const fn diag(d: [f64; 3], basis: Basis) -> Self {
        Self { t: [[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]], basis }
    }

    pub fn trace(&self) -> f64 {
        self.t[0][0] + self.t[1][1] + self.t[2][2]
    }

    pub fn diagonal(&self) -> [f64; 3] {
        [self.t[0][0], self.t[1][1], self.t[2][2]]
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { t: self.t.map(|r| r.map(|v| v * s)), basis: self.basis }
    }

    pub fn frobenius(&self) -> f64 {
        self.t.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Removes the trace: `T - (tr T / 3) δ`.
    pub fn traceless_part(&self) -> Self {
        let m = self.trace() / 3.0;
        let mut out = *self;
        for i in 0..3 {
            out.t[i][i] -= m;
        }
        out
    }

    pub fn matmul(&self, rhs: &Mixed3) -> Mixed3 {
        check_basis(self.basis, rhs.basis);
        let mut t = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                t[i][j] = (0..3).map(|r| self.t[i][r] * rhs.t[r][j]).sum();
            }
        }
        Mixed3 { t, basis: self.basis }
    }

    /// Lowers the first index: `T_ij = g_ik T^k_j`.
    pub fn lower(&self, g: &SymMat3) -> [[f64; 3]; 3] {
        check_basis(self.basis, g.basis);
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = (0..3).map(|k| g.get(i, k) * self.t[k][j]).sum();
            }
        }
        out
    }
}

impl Add for Mixed3 {
    type Output = Mixed3;
    fn add(self, rhs: Mixed3) -> Mixed3 {
        check_basis(self.basis, rhs.basis);
        let mut t = self.t;
        for i in 0..3 {
            for j in 0..3 {
                t[i][j] += rhs.t[i][j];
            }
        }
        Mixed3 { t, basis: self.basis }
    }
}

impl Sub for Mixed3 {
    type Output = Mixed3;
    fn sub(self, rhs: Mixed3) -> Mixed3 {
        self + rhs.scale(-1.0)
    }
}

impl Mul<f64> for Mixed3 {
    type Output = Mixed3;
    fn mul(self, s: f64) -> Mixed3 {
        self.scale(s)
    }
}

/// Inverse of a positive-definite symmetric matrix via the adjugate.
pub fn invert(g: &SymMat3) -> Result<SymMat3, TensorError> {
    g.check_positive_definite()?;
    let [a, b, c, d, e, f] = g.c;
    let det = g.det();
    let inv = [
        d * f - e * e,
        c * e - b * f,
        b * e - c * d,
        a * f - c * c,
        b * c - a * e,
        a * d - b * b,
    ];
    Ok(SymMat3 { c: inv.map(|v| v / det), basis: g.basis })
}

/// `T^i_j = g^{ik} T_kj`.
pub fn raise_index(t: &SymMat3, g_inv: &SymMat3) -> Mixed3 {
    check_basis(t.basis, g_inv.basis);
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| g_inv.get(i, k) * t.get(k, j)).sum();
        }
    }
    Mixed3 { t: out, basis: t.basis }
}

/// Metric-contracted square `T_ij T_kl g^ik g^jl`.
pub fn norm2(t: &SymMat3, g: &SymMat3) -> Result<f64, TensorError> {
    let mixed = raise_index(t, &invert(g)?);
    // tr(M M) with M = g^{-1} T
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += mixed.t[i][j] * mixed.t[j][i];
        }
    }
    Ok(s.max(0.0))
}

/// `l`-fold matrix product of a mixed tensor with itself, `l` odd.
pub fn odd_power(c: &Mixed3, l: u32) -> Result<Mixed3, TensorError> {
    if l % 2 == 0 {
        return Err(TensorError::EvenPower(l));
    }
    let sq = c.matmul(c);
    let mut out = *c;
    for _ in 0..(l / 2) {
        out = out.matmul(&sq);
    }
    Ok(out)
}

/// Determinant of a general 3×3 matrix.
pub fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Inverse of a general 3×3 matrix; `None` when singular.
pub fn inv3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = det3(m);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            out[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
        }
    }
    Some(out)
}

/// Levi-Civita symbol `[ijk]`.
#[inline]
pub fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}
