//! Dense quaternion matrices and the complex adjoint embedding.
//!
//! A quaternion matrix `A = A1 + A2·j` (with `A1`, `A2` complex) is carried
//! into the `2n×2n` complex matrix `[[A1, A2], [-conj(A2), conj(A1)]]`. The
//! embedding is an injective algebra homomorphism, so determinants, inverses,
//! exponentials and spectra are all computed on the complex side and mapped
//! back.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::quaternion::Quaternion;

/// Tolerance on the block-structure residue of an adjoint matrix.
pub const OMEGA_TOL: f64 = 1e-10;

/// Dense row-major quaternion matrix.
///
/// Serializes as nested row-major arrays of `[q0, q1, q2, q3]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Quaternion>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix { rows, cols, data: vec![Quaternion::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Quaternion::ONE;
        }
        m
    }

    pub fn from_diag(d: &[Quaternion]) -> Self {
        let mut m = QMatrix::zeros(d.len(), d.len());
        for (i, q) in d.iter().enumerate() {
            m[(i, i)] = *q;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Quaternion) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        QMatrix { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Quaternion>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{} entries", rows * cols),
                found: format!("{} entries", data.len()),
            });
        }
        Ok(QMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<Quaternion>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
            return Err(Error::DimensionMismatch {
                expected: format!("rows of length {ncols}"),
                found: format!("row of length {}", bad.len()),
            });
        }
        Ok(QMatrix { rows: nrows, cols: ncols, data: rows.into_iter().flatten().collect() })
    }

    /// `A1 + A2·j` from the two complex parts.
    pub fn from_complex_parts(a1: &CMatrix, a2: &CMatrix) -> Self {
        assert_eq!(a1.shape(), a2.shape());
        QMatrix::from_fn(a1.nrows(), a1.ncols(), |r, c| {
            Quaternion::from_complex_parts(a1[(r, c)], a2[(r, c)])
        })
    }

    pub fn complex_parts(&self) -> (CMatrix, CMatrix) {
        let a1 = CMatrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)].complex_parts().0);
        let a2 = CMatrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)].complex_parts().1);
        (a1, a2)
    }

    /// Complex matrix viewed as a quaternion matrix with zero `j`, `k` parts.
    pub fn from_complex(a: &CMatrix) -> Self {
        QMatrix::from_fn(a.nrows(), a.ncols(), |r, c| Quaternion::new(a[(r, c)].re, a[(r, c)].im, 0.0, 0.0))
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Quaternion] {
        &self.data
    }

    pub fn entries_mut(&mut self) -> &mut [Quaternion] {
        &mut self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<Quaternion>> {
        self.data.chunks(self.cols.max(1)).map(<[Quaternion]>::to_vec).take(self.rows).collect()
    }

    pub fn column(&self, c: usize) -> Vec<Quaternion> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NonSquare { rows: self.rows, cols: self.cols })
        }
    }

    pub fn scale(&self, s: f64) -> QMatrix {
        QMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|q| q.scale(s)).collect() }
    }

    /// `q·A`, scalar on the left.
    pub fn left_scale(&self, q: Quaternion) -> QMatrix {
        QMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| q * *a).collect() }
    }

    /// `A·q`, scalar on the right.
    pub fn right_scale(&self, q: Quaternion) -> QMatrix {
        QMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| *a * q).collect() }
    }

    /// `self + s·other`, in place.
    pub fn axpy(&mut self, s: f64, other: &QMatrix) {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b.scale(s);
        }
    }

    /// Conjugate transpose `A†`.
    pub fn conj_transpose(&self) -> QMatrix {
        QMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> QMatrix {
        QMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn trace(&self) -> Quaternion {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).fold(Quaternion::ZERO, |a, b| a + b)
    }

    /// Entrywise sum norm `Σ|a_ij|`.
    pub fn sum_norm(&self) -> f64 {
        self.data.iter().map(|q| q.norm()).sum()
    }

    /// Squared Frobenius norm `Σ|a_ij|²`.
    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|q| q.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|q| q.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_entry_dist(&self, other: &QMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (*a - *b).norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|q| q.is_finite())
    }

    /// True if every entry has zero `j` and `k` components.
    pub fn is_complex(&self) -> bool {
        self.data.iter().all(|q| q.q2 == 0.0 && q.q3 == 0.0)
    }

    pub fn mul_vec(&self, v: &[Quaternion]) -> Vec<Quaternion> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| (0..self.cols).fold(Quaternion::ZERO, |acc, c| acc + self[(r, c)] * v[c]))
            .collect()
    }

    /// Complex adjoint `χ_A`.
    pub fn adjoint(&self) -> Result<AdjointMatrix> {
        self.require_square()?;
        Ok(AdjointMatrix::embed(self))
    }

    /// q-determinant `det(χ_A)`; the imaginary residue is discarded.
    pub fn qdet(&self) -> Result<f64> {
        Ok(self.qdet_with_residue()?.0)
    }

    /// q-determinant together with the discarded imaginary part of `det(χ_A)`.
    pub fn qdet_with_residue(&self) -> Result<(f64, f64)> {
        let chi = self.adjoint()?;
        let d = linalg::determinant(chi.as_complex());
        Ok((d.re, d.im))
    }

    pub fn inverse(&self) -> Result<QMatrix> {
        let chi = self.adjoint()?;
        let inv = linalg::inverse(chi.as_complex()).ok_or(Error::Singular { qdet: 0.0 })?;
        let inv = AdjointMatrix::from_complex(inv)?;
        if !inv.as_complex().iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Singular { qdet: self.qdet().unwrap_or(0.0) });
        }
        Ok(inv.to_qmatrix())
    }

    /// Integer power by repeated squaring (noncommutative but powers of one matrix commute).
    pub fn powi(&self, mut e: u32) -> Result<QMatrix> {
        let n = self.require_square()?;
        let mut base = self.clone();
        let mut acc = QMatrix::identity(n);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        Ok(acc)
    }
}

impl Index<(usize, usize)> for QMatrix {
    type Output = Quaternion;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Quaternion {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for QMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Quaternion {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl<'a> Mul<&'a QMatrix> for &'a QMatrix {
    type Output = QMatrix;
    fn mul(self, rhs: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = QMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == Quaternion::ZERO {
                    continue;
                }
                for c in 0..rhs.cols {
                    out.data[r * rhs.cols + c] += a * rhs[(k, c)];
                }
            }
        }
        out
    }
}

impl Mul for QMatrix {
    type Output = QMatrix;
    fn mul(self, rhs: QMatrix) -> QMatrix {
        &self * &rhs
    }
}

impl<'a> Add<&'a QMatrix> for &'a QMatrix {
    type Output = QMatrix;
    fn add(self, rhs: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a + *b).collect(),
        }
    }
}

impl Add for QMatrix {
    type Output = QMatrix;
    fn add(self, rhs: QMatrix) -> QMatrix {
        &self + &rhs
    }
}

impl<'a> Sub<&'a QMatrix> for &'a QMatrix {
    type Output = QMatrix;
    fn sub(self, rhs: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a - *b).collect(),
        }
    }
}

impl Sub for QMatrix {
    type Output = QMatrix;
    fn sub(self, rhs: QMatrix) -> QMatrix {
        &self - &rhs
    }
}

impl Neg for &QMatrix {
    type Output = QMatrix;
    fn neg(self) -> QMatrix {
        self.scale(-1.0)
    }
}

impl fmt::Display for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            write!(f, "[")?;
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, ", ")?;
                }
                match f.precision() {
                    Some(p) => write!(f, "{:.p$}", self[(r, c)])?,
                    None => write!(f, "{}", self[(r, c)])?,
                }
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

impl Serialize for QMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for QMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<Quaternion>>::deserialize(d)?;
        QMatrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

/// A `2n×2n` complex matrix in the block form `[[A1, A2], [-conj(A2), conj(A1)]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointMatrix {
    n: usize,
    m: CMatrix,
}

impl AdjointMatrix {
    fn embed(a: &QMatrix) -> Self {
        let n = a.rows;
        let mut m = CMatrix::zeros(2 * n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                let (a1, a2) = a[(r, c)].complex_parts();
                m[(r, c)] = a1;
                m[(r, n + c)] = a2;
                m[(n + r, c)] = -a2.conj();
                m[(n + r, n + c)] = a1.conj();
            }
        }
        AdjointMatrix { n, m }
    }

    /// Wraps a complex matrix after checking the block structure within [`OMEGA_TOL`]
    /// (relative to `max(1, ‖M‖_F)`) and projecting it onto the exact form.
    pub fn from_complex(m: CMatrix) -> Result<Self> {
        let residue = omega_residue(&m);
        let scale = linalg::norm_fro(&m).max(1.0);
        if residue.is_nan() || residue > OMEGA_TOL * scale {
            return Err(Error::OmegaViolation { residue });
        }
        Ok(AdjointMatrix { n: m.nrows() / 2, m: project_omega(&m) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_complex(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_complex(self) -> CMatrix {
        self.m
    }

    /// Reads `A1` and `A2` back out of the top block row.
    pub fn to_qmatrix(&self) -> QMatrix {
        let n = self.n;
        QMatrix::from_fn(n, n, |r, c| Quaternion::from_complex_parts(self.m[(r, c)], self.m[(r, n + c)]))
    }
}

/// Max deviation of `m` from the adjoint block structure.
pub fn omega_residue(m: &CMatrix) -> f64 {
    let (rows, cols) = m.shape();
    if rows != cols || rows % 2 != 0 {
        return f64::INFINITY;
    }
    let n = rows / 2;
    let mut worst = 0.0f64;
    for r in 0..n {
        for c in 0..n {
            worst = worst.max((m[(r, c)] - m[(n + r, n + c)].conj()).norm());
            worst = worst.max((m[(r, n + c)] + m[(n + r, c)].conj()).norm());
        }
    }
    worst
}

/// Averages the redundant blocks so the result has the exact adjoint form.
pub fn project_omega(m: &CMatrix) -> CMatrix {
    let n = m.nrows() / 2;
    let mut out = CMatrix::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            let a1 = (m[(r, c)] + m[(n + r, n + c)].conj()) * 0.5;
            let a2 = (m[(r, n + c)] - m[(n + r, c)].conj()) * 0.5;
            out[(r, c)] = a1;
            out[(r, n + c)] = a2;
            out[(n + r, c)] = -a2.conj();
            out[(n + r, n + c)] = a1.conj();
        }
    }
    out
}

/// Quaternion column vector `u1 - conj(u2)·j` from a complex vector `(u1, u2)` of length `2n`.
pub fn quaternion_vector_from_complex(u: &[Complex64]) -> Vec<Quaternion> {
    let n = u.len() / 2;
    (0..n).map(|i| Quaternion::from_complex_parts(u[i], -u[n + i].conj())).collect()
}

/// Inverse of [`quaternion_vector_from_complex`].
pub fn complex_vector_from_quaternion(v: &[Quaternion]) -> Vec<Complex64> {
    let n = v.len();
    let mut out = vec![Complex64::new(0.0, 0.0); 2 * n];
    for (i, q) in v.iter().enumerate() {
        let (c1, c2) = q.complex_parts();
        out[i] = c1;
        out[n + i] = -c2.conj();
    }
    out
}

pub fn vec_sum_norm(v: &[Quaternion]) -> f64 {
    v.iter().map(|q| q.norm()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{rand_qmatrix, rng};

    fn q(a: f64, b: f64, c: f64, d: f64) -> Quaternion {
        Quaternion::new(a, b, c, d)
    }

    fn cdist(a: &CMatrix, b: &CMatrix) -> f64 {
        linalg::norm_fro(&(a - b))
    }

    #[test]
    fn adjoint_of_scalar() {
        let a = QMatrix::from_diag(&[q(1.0, 2.0, 3.0, 4.0)]);
        let chi = a.adjoint().unwrap();
        let m = chi.as_complex();
        assert_eq!(m[(0, 0)], Complex64::new(1.0, 2.0));
        assert_eq!(m[(0, 1)], Complex64::new(3.0, 4.0));
        assert_eq!(m[(1, 0)], Complex64::new(-3.0, 4.0));
        assert_eq!(m[(1, 1)], Complex64::new(1.0, -2.0));
        assert_eq!(chi.to_qmatrix(), a);
        assert_eq!(
            *QMatrix::identity(3).adjoint().unwrap().as_complex(),
            CMatrix::identity(6, 6)
        );
    }

    #[test]
    fn non_square_rejected() {
        let a = QMatrix::zeros(2, 3);
        assert!(matches!(a.adjoint(), Err(Error::NonSquare { rows: 2, cols: 3 })));
        assert!(matches!(a.qdet(), Err(Error::NonSquare { .. })));
    }

    #[test]
    fn adjoint_is_homomorphism() {
        let mut rng = rng(20);
        for n in 1..=6 {
            for _ in 0..20 {
                let a = rand_qmatrix(&mut rng, n, 1.0);
                let b = rand_qmatrix(&mut rng, n, 1.0);
                let ca = a.adjoint().unwrap().into_complex();
                let cb = b.adjoint().unwrap().into_complex();
                assert_eq!((&a + &b).adjoint().unwrap().into_complex(), &ca + &cb);
                let prod = (&a * &b).adjoint().unwrap().into_complex();
                assert!(cdist(&prod, &(&ca * &cb)) < 1e-12);
                let inv = a.inverse().unwrap().adjoint().unwrap().into_complex();
                let cinv = linalg::inverse(&ca).unwrap();
                assert!(cdist(&inv, &cinv) < 1e-10 * linalg::norm_fro(&cinv).max(1.0));
            }
        }
    }

    #[test]
    fn qdet_properties() {
        assert!((QMatrix::identity(3).qdet().unwrap() - 1.0).abs() < 1e-14);
        let mut rng = rng(21);
        for _ in 0..50 {
            // complex matrices: |A|_q = |det A|²
            let a = rand_qmatrix(&mut rng, 3, 1.0);
            let (a1, _) = a.complex_parts();
            let ac = QMatrix::from_complex(&a1);
            let d = linalg::determinant(&a1).norm_sqr();
            assert!((ac.qdet().unwrap() - d).abs() < 1e-10);

            let b = rand_qmatrix(&mut rng, 3, 1.0);
            let lhs = (&a * &b).qdet().unwrap();
            let rhs = a.qdet().unwrap() * b.qdet().unwrap();
            assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1e-300));
            let (val, residue) = a.qdet_with_residue().unwrap();
            assert!(val >= -1e-12 && residue.abs() < 1e-10);
        }
    }

    #[test]
    fn norms() {
        assert_eq!(QMatrix::identity(2).sum_norm(), 2.0);
        let mut rng = rng(22);
        for _ in 0..1000 {
            let a = rand_qmatrix(&mut rng, 3, 1.0);
            let b = rand_qmatrix(&mut rng, 3, 1.0);
            assert!((&a * &b).sum_norm() <= a.sum_norm() * b.sum_norm() * (1.0 + 1e-15));
        }
    }

    #[test]
    fn singular_matrix_detected() {
        // second row is a left-quaternion multiple of the first
        let r0 = vec![q(1.0, 2.0, 0.0, 1.0), q(0.0, 1.0, 1.0, 0.0)];
        let s = q(0.5, -1.0, 2.0, 0.3);
        let r1: Vec<_> = r0.iter().map(|x| s * *x).collect();
        let a = QMatrix::from_rows(vec![r0, r1]).unwrap();
        assert!(a.qdet().unwrap().abs() < 1e-12);
        let chi = a.adjoint().unwrap().into_complex();
        assert_eq!(linalg::rank(&chi, 1e-10), 2);
    }

    #[test]
    fn omega_projection() {
        let mut rng = rng(23);
        let a = rand_qmatrix(&mut rng, 3, 1.0);
        let mut m = a.adjoint().unwrap().into_complex();
        assert_eq!(omega_residue(&m), 0.0);
        m[(0, 0)] += Complex64::new(1e-12, 0.0);
        let p = AdjointMatrix::from_complex(m.clone()).unwrap();
        assert!(omega_residue(p.as_complex()) == 0.0);
        m[(0, 0)] += Complex64::new(1.0, 0.0);
        assert!(matches!(AdjointMatrix::from_complex(m), Err(Error::OmegaViolation { .. })));
    }

    #[test]
    fn vector_embedding_round_trip() {
        let v = vec![q(1.0, 2.0, 3.0, 4.0), q(-1.0, 0.5, 0.0, 2.0)];
        assert_eq!(quaternion_vector_from_complex(&complex_vector_from_quaternion(&v)), v);
    }

}
