//! Dense complex linear algebra used behind the adjoint embedding.
//!
//! Schur decomposition (Householder Hessenberg reduction followed by shifted
//! QR with Givens rotations), the Padé matrix exponential and the principal
//! logarithm via inverse scaling and squaring all live here. LU and SVD come
//! from nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Maximum QR sweeps spent on a single eigenvalue before giving up.
const MAX_QR_ITER_PER_EIG: usize = 200;

/// Maximum absolute row sum.
pub fn norm_inf(a: &CMatrix) -> f64 {
    (0..a.nrows())
        .map(|r| (0..a.ncols()).map(|c| a[(r, c)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Maximum absolute column sum.
pub fn norm_1(a: &CMatrix) -> f64 {
    (0..a.ncols())
        .map(|c| (0..a.nrows()).map(|r| a[(r, c)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn norm_fro(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Complex Schur form `A = Q T Q^H` with `T` upper triangular.
#[derive(Debug, Clone)]
pub struct Schur {
    pub q: CMatrix,
    pub t: CMatrix,
}

impl Schur {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.t.nrows()).map(|i| self.t[(i, i)]).collect()
    }

    pub fn reconstruct(&self) -> CMatrix {
        &self.q * &self.t * self.q.adjoint()
    }
}

/// Householder reduction to upper Hessenberg form, accumulating the unitary factor.
fn hessenberg(h: &mut CMatrix, q: &mut CMatrix) {
    let n = h.nrows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let xnorm = (k + 1..n).map(|r| h[(r, k)].norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 { ONE } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;
        let mut v: Vec<Complex64> = (k + 1..n).map(|r| h[(r, k)]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // H ← (I - 2vv^H) H
        for c in 0..n {
            let dot: Complex64 = v
                .iter()
                .enumerate()
                .map(|(i, vi)| vi.conj() * h[(k + 1 + i, c)])
                .sum();
            for (i, vi) in v.iter().enumerate() {
                h[(k + 1 + i, c)] -= *vi * dot * 2.0;
            }
        }
        // H ← H (I - 2vv^H), Q ← Q (I - 2vv^H)
        for m in [&mut *h, &mut *q] {
            for r in 0..n {
                let dot: Complex64 = v
                    .iter()
                    .enumerate()
                    .map(|(i, vi)| m[(r, k + 1 + i)] * vi)
                    .sum();
                for (i, vi) in v.iter().enumerate() {
                    m[(r, k + 1 + i)] -= dot * vi.conj() * 2.0;
                }
            }
        }
        for r in k + 2..n {
            h[(r, k)] = ZERO;
        }
    }
}

/// Rotation `[c s; -s̄ c]` mapping `(x, y)` to `(r, 0)`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, ZERO);
    }
    if ax == 0.0 {
        return (0.0, ONE);
    }
    let nrm = ax.hypot(ay);
    (ax / nrm, (x / ax) * y.conj() / nrm)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let m1 = (a + d) * 0.5 + disc;
    let m2 = (a + d) * 0.5 - disc;
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

/// Complex Schur decomposition.
pub fn schur(a: &CMatrix) -> Result<Schur> {
    assert!(a.is_square());
    let n = a.nrows();
    let mut t = a.clone();
    let mut q = CMatrix::identity(n, n);
    if n == 0 {
        return Ok(Schur { q, t });
    }
    if t.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigenFailure);
    }
    hessenberg(&mut t, &mut q);

    let scale = norm_fro(&t).max(f64::MIN_POSITIVE);
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iter = 0usize;
    while hi > 0 {
        // locate the active unreduced block [lo, hi]
        let mut lo = hi;
        while lo > 0 {
            let sub = t[(lo, lo - 1)].norm();
            let diag = t[(lo - 1, lo - 1)].norm() + t[(lo, lo)].norm();
            let thresh = if diag > 0.0 { eps * diag } else { eps * scale };
            if sub <= thresh || sub <= f64::MIN_POSITIVE / eps {
                t[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > MAX_QR_ITER_PER_EIG {
            return Err(Error::EigenFailure);
        }
        let mu = if iter.is_multiple_of(11) {
            // exceptional shift to break cycles
            t[(hi, hi)] + Complex64::new(0.75, 0.31) * t[(hi, hi - 1)].norm()
        } else {
            wilkinson_shift(
                t[(hi - 1, hi - 1)],
                t[(hi - 1, hi)],
                t[(hi, hi - 1)],
                t[(hi, hi)],
            )
        };

        for k in lo..=hi {
            t[(k, k)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(t[(k, k)], t[(k + 1, k)]);
            for col in k..n {
                let x = t[(k, col)];
                let y = t[(k + 1, col)];
                t[(k, col)] = x * c + s * y;
                t[(k + 1, col)] = -s.conj() * x + y * c;
            }
            t[(k + 1, k)] = ZERO;
            rots.push((k, c, s));
        }
        for &(k, c, s) in &rots {
            let rmax = (k + 2).min(hi);
            for r in 0..=rmax {
                let x = t[(r, k)];
                let y = t[(r, k + 1)];
                t[(r, k)] = x * c + s.conj() * y;
                t[(r, k + 1)] = -s * x + y * c;
            }
            for r in 0..n {
                let x = q[(r, k)];
                let y = q[(r, k + 1)];
                q[(r, k)] = x * c + s.conj() * y;
                q[(r, k + 1)] = -s * x + y * c;
            }
        }
        for k in lo..=hi {
            t[(k, k)] += mu;
        }
    }
    for c in 0..n {
        for r in c + 1..n {
            t[(r, c)] = ZERO;
        }
    }
    Ok(Schur { q, t })
}

pub fn eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    Ok(schur(a)?.eigenvalues())
}

/// Singular values in descending order.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Orthonormal basis (as columns) of the numerical kernel `{x : ‖Ax‖ ≤ tol}`.
pub fn null_space(a: &CMatrix, tol: f64) -> CMatrix {
    let (m, n) = a.shape();
    // pad to at least square so the SVD yields a full set of right vectors
    let padded = if m < n {
        let mut p = CMatrix::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let cols: Vec<_> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= tol)
        .map(|(i, _)| v_t.row(i).adjoint())
        .collect();
    if cols.is_empty() {
        CMatrix::zeros(n, 0)
    } else {
        CMatrix::from_columns(&cols)
    }
}

pub fn rank(a: &CMatrix, tol: f64) -> usize {
    if a.ncols() == 0 || a.nrows() == 0 {
        return 0;
    }
    singular_values(a).iter().filter(|s| **s > tol).count()
}

pub fn determinant(a: &CMatrix) -> Complex64 {
    a.clone().lu().determinant()
}

pub fn inverse(a: &CMatrix) -> Option<CMatrix> {
    a.clone().lu().try_inverse()
}

/// Solves `A X = B`.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Option<CMatrix> {
    a.clone().lu().solve(b)
}

// Padé(13) coefficients for the exponential, with the 1-norm bound θ13.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with a degree-13 Padé kernel.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let ident = CMatrix::identity(n, n);
    if n == 0 {
        return ident;
    }
    let nrm = norm_1(a);
    let s = if nrm > THETA13 {
        (nrm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = a * Complex64::new(2f64.powi(-s), 0.0);
    let b = &PADE13;
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let re = |x: f64| Complex64::new(x, 0.0);
    let u_inner = &a6 * (&a6 * re(b[13]) + &a4 * re(b[11]) + &a2 * re(b[9]))
        + &a6 * re(b[7])
        + &a4 * re(b[5])
        + &a2 * re(b[3])
        + &ident * re(b[1]);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * re(b[12]) + &a4 * re(b[10]) + &a2 * re(b[8]))
        + &a6 * re(b[6])
        + &a4 * re(b[4])
        + &a2 * re(b[2])
        + &ident * re(b[0]);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = solve(&q, &p).expect("Padé denominator is nonsingular within θ13");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Principal square root of an upper triangular matrix.
fn sqrt_upper(t: &CMatrix) -> CMatrix {
    let n = t.nrows();
    let mut r = CMatrix::zeros(n, n);
    for j in 0..n {
        r[(j, j)] = t[(j, j)].sqrt();
        for i in (0..j).rev() {
            let mut s = t[(i, j)];
            for k in i + 1..j {
                s -= r[(i, k)] * r[(k, j)];
            }
            r[(i, j)] = s / (r[(i, i)] + r[(j, j)]);
        }
    }
    r
}

/// Solves `U X = B` for upper triangular `U`.
fn solve_upper(u: &CMatrix, b: &CMatrix) -> CMatrix {
    let n = u.nrows();
    let mut x = b.clone();
    for c in 0..b.ncols() {
        for i in (0..n).rev() {
            let mut s = x[(i, c)];
            for k in i + 1..n {
                s -= u[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = s / u[(i, i)];
        }
    }
    x
}

/// Gauss–Legendre nodes and weights on [0, 1], 8 points.
fn gauss_legendre_01() -> [(f64, f64); 8] {
    const X: [f64; 4] = [
        0.183_434_642_495_649_8,
        0.525_532_409_916_329,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_3,
    ];
    const W: [f64; 4] = [
        0.362_683_783_378_362,
        0.313_706_645_877_887_3,
        0.222_381_034_453_374_5,
        0.101_228_536_290_376_3,
    ];
    let mut out = [(0.0, 0.0); 8];
    for i in 0..4 {
        out[2 * i] = ((1.0 - X[i]) / 2.0, W[i] / 2.0);
        out[2 * i + 1] = ((1.0 + X[i]) / 2.0, W[i] / 2.0);
    }
    out
}

/// True if some eigenvalue lies within `tol` of the closed negative real axis.
pub fn touches_negative_axis(eigs: &[Complex64], tol: f64) -> bool {
    eigs.iter().any(|z| z.re <= tol && z.im.abs() <= tol)
}

/// Principal logarithm by inverse scaling and squaring on the Schur form.
///
/// Returns `None` when an eigenvalue sits on the closed negative real axis,
/// where the principal branch is undefined.
pub fn logm_principal(a: &CMatrix) -> Result<Option<CMatrix>> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Some(CMatrix::zeros(0, 0)));
    }
    let sch = schur(a)?;
    let scale = norm_fro(a).max(1.0);
    let eigs = sch.eigenvalues();
    if touches_negative_axis(&eigs, 1e-12 * scale) || eigs.iter().any(|z| z.norm() == 0.0) {
        return Ok(None);
    }
    let ident = CMatrix::identity(n, n);
    let mut t = sch.t.clone();
    let mut k = 0;
    while norm_1(&(&t - &ident)) > 0.25 {
        if k >= 64 {
            return Ok(None);
        }
        t = sqrt_upper(&t);
        k += 1;
    }
    // extra roots cost little and sharpen the Padé kernel
    for _ in 0..2 {
        t = sqrt_upper(&t);
        k += 1;
    }
    let x = &t - &ident;
    let mut log_t = CMatrix::zeros(n, n);
    for (node, weight) in gauss_legendre_01() {
        let denom = &ident + &x * Complex64::new(node, 0.0);
        log_t += solve_upper(&denom, &x) * Complex64::new(weight, 0.0);
    }
    log_t *= Complex64::new(2f64.powi(k), 0.0);
    Ok(Some(&sch.q * log_t * sch.q.adjoint()))
}
