//! Small dense complex linear algebra.
//!
//! Everything here works on matrices of dimension 2, 3 or 4. The Hermitian
//! eigensolver is a cyclic Jacobi iteration, which is deterministic and
//! accurate to a few ulps at these sizes.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Off-diagonal Frobenius mass at which Jacobi sweeps stop.
const JACOBI_OFF_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 64;
const RESIDUAL_TOL: f64 = 1e-10;

/// Dense square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn new(dim: usize, data: Vec<C64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::Dimension {
                expected: dim * dim,
                got: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { what: "matrix" });
        }
        Ok(Self { dim, data })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds a matrix from rows of complex entries.
    pub fn from_rows<const N: usize>(rows: [[C64; N]; N]) -> Self {
        Self::from_fn(N, |i, j| rows[i][j])
    }

    pub fn from_real<const N: usize>(rows: [[f64; N]; N]) -> Self {
        Self::from_fn(N, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn diag(values: &[f64]) -> Self {
        Self::from_fn(values.len(), |i, j| {
            if i == j {
                C64::new(values[i], 0.0)
            } else {
                ZERO
            }
        })
    }

    /// The rank-one projector-like matrix `v v^dagger`.
    pub fn outer(v: &[C64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &CMatrix) -> CMatrix {
        let (m, n) = (self.dim, rhs.dim);
        CMatrix::from_fn(m * n, |i, j| self[(i / n, j / n)] * rhs[(i % n, j % n)])
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.dim, v.len(), "mul_vec dimension mismatch");
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// `u * self * u^dagger`.
    pub fn conjugate_by(&self, u: &CMatrix) -> CMatrix {
        u.matmul(self).matmul(&u.adjoint())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry of `|M - M^dagger|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim;
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// Largest entry of `|U^dagger U - I|`.
    pub fn unitary_deviation(&self) -> f64 {
        self.adjoint()
            .matmul(self)
            .max_abs_diff(&CMatrix::identity(self.dim))
    }

    pub fn check_hermitian(&self) -> Result<()> {
        let dev = self.hermitian_deviation();
        if dev > HERMITIAN_TOL * self.max_abs().max(1.0) {
            Err(Error::NotHermitian { deviation: dev })
        } else {
            Ok(())
        }
    }

    pub fn check_unitary(&self, tol: f64) -> Result<()> {
        let dev = self.unitary_deviation();
        if dev > tol {
            Err(Error::NotUnitary { deviation: dev })
        } else {
            Ok(())
        }
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

impl Mul<f64> for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: f64) -> CMatrix {
        self.scale(C64::new(rhs, 0.0))
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim);
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim);
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Real eigenvalues sorted in descending order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    /// Sorts descending; ties keep their original relative order.
    pub fn from_unsorted(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        Spectrum(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.0.first().copied().unwrap_or(f64::NAN)
    }

    pub fn min(&self) -> f64 {
        self.0.last().copied().unwrap_or(f64::NAN)
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn max_abs_diff(&self, other: &Spectrum) -> f64 {
        assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Smallest distance between two distinct eigenvalue slots.
    pub fn min_gap(&self) -> f64 {
        self.0
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(f64::INFINITY, f64::min)
    }
}

impl From<Spectrum> for Vec<f64> {
    fn from(s: Spectrum) -> Self {
        s.0
    }
}

/// Eigenvalues of a Hermitian matrix, sorted descending.
pub fn eig_hermitian(m: &CMatrix) -> Result<Spectrum> {
    eigh(m).map(|(s, _)| s)
}

/// Eigen-decomposition of a Hermitian matrix. Eigenvector `k` is column `k`
/// of the returned matrix and pairs with entry `k` of the spectrum.
pub fn eigh(m: &CMatrix) -> Result<(Spectrum, CMatrix)> {
    m.check_hermitian()?;
    let n = m.dim();
    // work on the exactly Hermitian part
    let mut a = CMatrix::from_fn(n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius().max(1.0);

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal(&a) <= JACOBI_OFF_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let values: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));

    let sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let vectors = CMatrix::from_fn(n, |i, k| v[(i, order[k])]);

    let tol = RESIDUAL_TOL * m.frobenius().max(1.0);
    for (k, &lam) in sorted.iter().enumerate() {
        let col: Vec<C64> = (0..n).map(|i| vectors[(i, k)]).collect();
        let mv = m.mul_vec(&col);
        let residual = mv
            .iter()
            .zip(&col)
            .map(|(x, y)| (x - y * lam).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if residual > tol {
            return Err(Error::EigenResidual { residual });
        }
    }

    Ok((Spectrum(sorted), vectors))
}

fn off_diagonal(a: &CMatrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One complex Jacobi rotation annihilating `a[p][q]`.
///
/// The rotation is `G = diag(1, e^{-i alpha}) * [[c, s], [-s, c]]` embedded
/// at rows/columns `p, q`, where `alpha = arg a[p][q]`; `a <- G^dagger a G`.
fn jacobi_rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let phase = apq / r;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let g_qp = -phase.conj() * s;
    let g_qq = phase.conj() * c;
    let n = a.dim();

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c + akq * g_qp;
        a[(k, q)] = akp * s + akq * g_qq;
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c + vkq * g_qp;
        v[(k, q)] = vkp * s + vkq * g_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c + aqk * g_qp.conj();
        a[(q, k)] = apk * s + aqk * g_qq.conj();
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
}

/// Singular value decomposition of a 2×2 matrix in the form
/// `v * a * u^T = d`, with `d` real diagonal and descending.
#[derive(Clone, Debug)]
pub struct Svd2 {
    pub u: CMatrix,
    pub d: CMatrix,
    pub v: CMatrix,
}

impl Svd2 {
    pub fn singular_values(&self) -> [f64; 2] {
        [self.d[(0, 0)].re, self.d[(1, 1)].re]
    }

    /// Rebuilds `a = v^dagger d conj(u)`.
    pub fn reconstruct(&self) -> CMatrix {
        self.v.adjoint().matmul(&self.d).matmul(&self.u.conj())
    }
}

pub fn svd2(a: &CMatrix) -> Result<Svd2> {
    if a.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: a.dim(),
        });
    }
    // right singular vectors from a^dagger a
    let gram = a.adjoint().matmul(a);
    let (_, x) = eigh(&gram)?;
    let x1 = [x[(0, 0)], x[(1, 0)]];
    let x2 = [x[(0, 1)], x[(1, 1)]];

    let ax1 = a.mul_vec(&x1);
    let s1 = (ax1[0].norm_sqr() + ax1[1].norm_sqr()).sqrt();
    let w1 = if s1 > 0.0 {
        [ax1[0] / s1, ax1[1] / s1]
    } else {
        [ONE, ZERO]
    };
    // orthogonal complement of w1 in C^2
    let mut w2 = [-w1[1].conj(), w1[0].conj()];
    let ax2 = a.mul_vec(&x2);
    let proj = w2[0].conj() * ax2[0] + w2[1].conj() * ax2[1];
    let s2 = proj.norm();
    if s2 > 0.0 {
        let ph = proj / s2;
        w2 = [w2[0] * ph, w2[1] * ph];
    }

    // W = [w1 w2], X = [x1 x2]; W^dagger a X = diag(s1, s2)
    let w = CMatrix::from_rows([[w1[0], w2[0]], [w1[1], w2[1]]]);
    let xm = CMatrix::from_rows([[x1[0], x2[0]], [x1[1], x2[1]]]);
    Ok(Svd2 {
        u: xm.transpose(),
        d: CMatrix::diag(&[s1, s2]),
        v: w.adjoint(),
    })
}

/// Real roots of `c3 x^3 + c2 x^2 + c1 x + c0`, sorted descending.
///
/// Uses the trigonometric form for three real roots, then one Newton step
/// per root on the original polynomial.
pub fn cubic_roots(c3: f64, c2: f64, c1: f64, c0: f64) -> Result<[f64; 3]> {
    if !(c3.is_finite() && c2.is_finite() && c1.is_finite() && c0.is_finite()) {
        return Err(Error::NonFinite {
            what: "cubic coefficient",
        });
    }
    if c3 == 0.0 {
        return Err(Error::Invalid("leading cubic coefficient is zero".into()));
    }
    let (b, c, d) = (c2 / c3, c1 / c3, c0 / c3);
    // x = t - b/3 gives t^3 + p t + q
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let disc = -(4.0 * p * p * p + 27.0 * q * q);
    let magnitude = 4.0 * p.abs().powi(3) + 27.0 * q * q;
    if disc < -1e-9 * magnitude {
        return Err(Error::ComplexRoots { discriminant: disc });
    }

    let mut roots = if p.abs() <= f64::EPSILON * (1.0 + b * b + c.abs()) {
        let t = (-q).cbrt();
        [t; 3]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = ((3.0 * q) / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        let tau = std::f64::consts::TAU / 3.0;
        [
            m * phi.cos(),
            m * (phi - tau).cos(),
            m * (phi - 2.0 * tau).cos(),
        ]
    };
    for r in roots.iter_mut() {
        *r -= shift;
        *r = newton_polish(*r, c3, c2, c1, c0);
    }
    roots.sort_by(|a, b| b.total_cmp(a));
    Ok(roots)
}

fn newton_polish(x: f64, c3: f64, c2: f64, c1: f64, c0: f64) -> f64 {
    let f = ((c3 * x + c2) * x + c1) * x + c0;
    let df = (3.0 * c3 * x + 2.0 * c2) * x + c1;
    if df == 0.0 || !df.is_finite() {
        return x;
    }
    let y = x - f / df;
    let fy = ((c3 * y + c2) * y + c1) * y + c0;
    if fy.abs() <= f.abs() {
        y
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_spectrum() {
        let s = eig_hermitian(&CMatrix::identity(4)).unwrap();
        assert_eq!(s.values(), &[1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn diagonal_spectrum_sorted() {
        let m = CMatrix::diag(&[0.111, 0.667, 0.111, 0.111]);
        let s = eig_hermitian(&m).unwrap();
        assert_eq!(s.values(), &[0.667, 0.111, 0.111, 0.111]);
    }

    #[test]
    fn two_by_two_complex() {
        // [[2, i], [-i, 2]] has eigenvalues 3 and 1
        let m = CMatrix::from_rows([[C64::new(2.0, 0.0), I], [-I, C64::new(2.0, 0.0)]]);
        let (s, v) = eigh(&m).unwrap();
        assert!((s.values()[0] - 3.0).abs() < 1e-14);
        assert!((s.values()[1] - 1.0).abs() < 1e-14);
        assert!(v.unitary_deviation() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_real([[1.0, 0.5], [0.0, 1.0]]);
        match eig_hermitian(&m) {
            Err(Error::NotHermitian { deviation }) => assert!((deviation - 0.5).abs() < 1e-15),
            other => panic!("expected NotHermitian, got {other:?}"),
        }
    }

    #[test]
    fn rejects_non_finite() {
        let err = CMatrix::new(1, vec![C64::new(f64::NAN, 0.0)]).unwrap_err();
        assert_eq!(err, Error::NonFinite { what: "matrix" });
    }

    #[test]
    fn svd_of_identity_and_diag() {
        let s = svd2(&CMatrix::identity(2)).unwrap();
        assert_eq!(s.singular_values(), [1.0, 1.0]);
        let a = CMatrix::diag(&[2.0, 1.0]);
        let s = svd2(&a).unwrap();
        let [d1, d2] = s.singular_values();
        assert!((d1 - 2.0).abs() < 1e-14 && (d2 - 1.0).abs() < 1e-14);
        assert!(s.reconstruct().max_abs_diff(&a) < 1e-14);
    }

    #[test]
    fn svd_of_zero_and_rank_one() {
        let z = svd2(&CMatrix::zeros(2)).unwrap();
        assert_eq!(z.singular_values(), [0.0, 0.0]);
        assert!(z.u.unitary_deviation() < 1e-14 && z.v.unitary_deviation() < 1e-14);

        let a = CMatrix::from_real([[1.0, 2.0], [2.0, 4.0]]);
        let s = svd2(&a).unwrap();
        assert!(s.singular_values()[1].abs() < 1e-14);
        assert!(s.reconstruct().max_abs_diff(&a) < 1e-13);
    }

    #[test]
    fn cubic_simple_roots() {
        // -(x-3)(x-2)(x-1) = -x^3 + 6x^2 - 11x + 6
        let r = cubic_roots(-1.0, 6.0, -11.0, 6.0).unwrap();
        for (got, want) in r.iter().zip([3.0, 2.0, 1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn cubic_triple_and_double_roots() {
        // (x-1)^3
        let r = cubic_roots(1.0, -3.0, 3.0, -1.0).unwrap();
        for x in r {
            assert!((x - 1.0).abs() < 1e-5);
        }
        // (x-2)^2 (x+1)
        let r = cubic_roots(1.0, -3.0, 0.0, 4.0).unwrap();
        assert!((r[0] - 2.0).abs() < 1e-7 && (r[1] - 2.0).abs() < 1e-7);
        assert!((r[2] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn cubic_complex_roots_rejected() {
        // x^3 + x has roots 0, ±i
        match cubic_roots(1.0, 0.0, 1.0, 0.0) {
            Err(Error::ComplexRoots { discriminant }) => assert!(discriminant < 0.0),
            other => panic!("expected ComplexRoots, got {other:?}"),
        }
    }

    #[test]
    fn kron_of_paulis() {
        let x = CMatrix::from_real([[0.0, 1.0], [1.0, 0.0]]);
        let k = x.kron(&x);
        assert_eq!(k[(0, 3)], ONE);
        assert_eq!(k[(1, 2)], ONE);
        assert_eq!(k[(0, 0)], ZERO);
    }
}
