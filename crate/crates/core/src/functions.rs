//! Matrix exponential and logarithm of quaternion matrices.
//!
//! Both are computed on the complex adjoint and mapped back after the block
//! structure has been checked and symmetrized.
//!
//! The principal logarithm of `χ_C` already has adjoint form whenever no
//! eigenvalue lies on the closed negative real axis. When one does, `χ_C` is
//! instead split along an invariant subspace `V` that carries exactly one
//! member of every conjugate eigenvalue pair: with `χ_C V = V J` and `P` the
//! quaternion matrix whose adjoint has `V` as its first block column,
//! `C = P J P⁻¹` with `J` complex, and `P log(J) P⁻¹` is a logarithm of `C`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::matrix::{self, AdjointMatrix, QMatrix};
use crate::quaternion::Quaternion;
use crate::spectrum::{self, multiset_close, EIG_CLUSTER_TOL};

/// Residual tolerance for `expm(logm(C)) = C`, relative to `‖C‖`.
pub const LOG_TOL: f64 = 1e-8;

/// `e^A`.
pub fn expm(a: &QMatrix) -> Result<QMatrix> {
    let chi = a.adjoint()?;
    let e = linalg::expm(chi.as_complex());
    Ok(AdjointMatrix::from_complex(e)?.to_qmatrix())
}

/// Which construction produced a logarithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogBranch {
    /// Principal logarithm of the adjoint.
    Principal,
    /// Invariant-subspace construction, used when the adjoint has eigenvalues
    /// on the closed negative real axis.
    Structured,
}

#[derive(Debug, Clone)]
pub struct Logarithm {
    pub log: QMatrix,
    pub branch: LogBranch,
    /// `‖e^B - C‖ / max(1, ‖C‖)` in the sum norm.
    pub residual: f64,
}

/// Singularity threshold `1e-12·max(1, ‖C‖^{2n})`.
pub fn singular_threshold(c: &QMatrix) -> f64 {
    let n = c.rows() as i32;
    1e-12 * c.sum_norm().powi(2 * n).max(1.0)
}

/// One logarithm `B` of `C` with `e^B = C`.
pub fn logm(c: &QMatrix) -> Result<QMatrix> {
    Ok(logm_with_diagnostics(c)?.log)
}

pub fn logm_with_diagnostics(c: &QMatrix) -> Result<Logarithm> {
    let chi = c.adjoint()?.into_complex();
    let qdet = c.qdet()?;
    if qdet <= singular_threshold(c) {
        return Err(Error::Singular { qdet });
    }
    let scale = c.sum_norm().max(1.0);
    let residual_of = |b: &QMatrix| -> Result<f64> { Ok((&expm(b)? - c).sum_norm() / scale) };

    let mut worst = f64::INFINITY;
    if let Some(l) = linalg::logm_principal(&chi)? {
        if let Ok(adj) = AdjointMatrix::from_complex(l) {
            let log = adj.to_qmatrix();
            let residual = residual_of(&log)?;
            if residual <= LOG_TOL {
                return Ok(Logarithm { log, branch: LogBranch::Principal, residual });
            }
            worst = residual;
        }
    }

    let log = structured_log(c, &chi)?;
    let residual = residual_of(&log)?;
    if residual <= LOG_TOL {
        Ok(Logarithm { log, branch: LogBranch::Structured, residual })
    } else {
        Err(Error::LogFailure { residual: residual.min(worst) })
    }
}

fn shifted(chi: &CMatrix, lambda: Complex64) -> CMatrix {
    let mut m = chi.clone();
    for i in 0..m.nrows() {
        m[(i, i)] -= lambda;
    }
    m
}

/// The antilinear map `u ↦ S·conj(u)` with `S = [[0, -I], [I, 0]]`; it commutes with `χ_C`
/// and squares to `-1`.
fn sigma(u: &[Complex64]) -> Vec<Complex64> {
    let n = u.len() / 2;
    let mut out = vec![Complex64::new(0.0, 0.0); 2 * n];
    for i in 0..n {
        out[i] = -u[n + i].conj();
        out[n + i] = u[i].conj();
    }
    out
}

fn normalized_columns(cols: &[Vec<Complex64>]) -> CMatrix {
    let dim = cols.first().map_or(0, Vec::len);
    let mut m = CMatrix::zeros(dim, cols.len());
    for (j, c) in cols.iter().enumerate() {
        let nrm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        for (i, z) in c.iter().enumerate() {
            m[(i, j)] = *z / nrm;
        }
    }
    m
}

fn col_rank(cols: &[Vec<Complex64>]) -> usize {
    if cols.is_empty() {
        return 0;
    }
    linalg::rank(&normalized_columns(cols), 1e-6)
}

fn apply(m: &CMatrix, v: &[Complex64]) -> Vec<Complex64> {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)] * v[c]).sum()).collect()
}

/// Half of a real-eigenvalue generalized eigenspace, closed under `χ_C - λ`, whose
/// image under `sigma` is a complement. Built from Jordan chains whose heads are
/// taken in `sigma`-paired couples.
fn real_half_space(chi: &CMatrix, lambda: f64, half_dim: usize) -> Result<Vec<Vec<Complex64>>> {
    let n2 = chi.nrows();
    let nil = shifted(chi, Complex64::new(lambda, 0.0));
    let mut power = CMatrix::identity(n2, n2);
    for _ in 0..half_dim {
        power = &power * &nil;
    }
    let g = spectrum::smallest_singular_vectors(&power, 2 * half_dim);

    let scale = linalg::norm_fro(chi).max(1.0);
    // kernels of nil^p restricted to span(g), as ambient vectors
    let mut kernels: Vec<Vec<Vec<Complex64>>> = vec![Vec::new()];
    let mut np = CMatrix::identity(n2, n2);
    for p in 1..=half_dim {
        np = &np * &nil;
        let restricted = &np * &g;
        let tol = 1e-7 * scale.powi(p as i32);
        let coords = linalg::null_space(&restricted, tol);
        let basis = &g * coords;
        kernels.push((0..basis.ncols()).map(|c| basis.column(c).iter().copied().collect()).collect());
    }
    // the top level is the whole generalized eigenspace
    kernels[half_dim] = (0..g.ncols()).map(|c| g.column(c).iter().copied().collect()).collect();

    let mut half: Vec<Vec<Complex64>> = Vec::new();
    let mut spanned: Vec<Vec<Complex64>> = Vec::new();
    for p in (1..=half_dim).rev() {
        for v in kernels[p].clone() {
            if half.len() >= half_dim {
                break;
            }
            let mut base = kernels[p - 1].clone();
            base.extend(spanned.iter().cloned());
            let r0 = col_rank(&base);
            base.push(v.clone());
            if col_rank(&base) <= r0 {
                continue;
            }
            let mut link = v.clone();
            let mut mirror = sigma(&v);
            for _ in 0..p {
                half.push(link.clone());
                spanned.push(link.clone());
                spanned.push(mirror.clone());
                link = apply(&nil, &link);
                mirror = apply(&nil, &mirror);
            }
        }
    }
    if half.len() != half_dim || col_rank(&spanned) != 2 * half_dim {
        return Err(Error::LogFailure { residual: f64::INFINITY });
    }
    Ok(half)
}

fn structured_log(c: &QMatrix, chi: &CMatrix) -> Result<QMatrix> {
    let n = c.rows();
    let tau_pair = spectrum::pair_tolerance(c);
    let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for cl in spectrum::clusters(c, chi)? {
        if cl.value.im > tau_pair {
            let m = cl.algebraic;
            let mut power = CMatrix::identity(2 * n, 2 * n);
            let nil = shifted(chi, cl.value);
            for _ in 0..m {
                power = &power * &nil;
            }
            let g = spectrum::smallest_singular_vectors(&power, m);
            columns.extend((0..m).map(|j| g.column(j).iter().copied().collect::<Vec<_>>()));
        } else {
            columns.extend(real_half_space(chi, cl.value.re, cl.algebraic)?);
        }
    }
    let v = {
        let mut m = CMatrix::zeros(2 * n, n);
        for (j, col) in columns.iter().enumerate() {
            for (i, z) in col.iter().enumerate() {
                m[(i, j)] = *z;
            }
        }
        m
    };
    // χ V = V J
    let vh = v.adjoint();
    let j = linalg::solve(&(&vh * &v), &(&vh * chi * &v)).ok_or(Error::LogFailure { residual: f64::INFINITY })?;

    // eigenvalues of J lie in the closed upper half-plane, so -iJ avoids the branch cut
    let rotated = &j * Complex64::new(0.0, -1.0);
    let log_rot = linalg::logm_principal(&rotated)?.ok_or(Error::LogFailure { residual: f64::INFINITY })?;
    let log_j = log_rot + CMatrix::identity(n, n) * Complex64::new(0.0, std::f64::consts::FRAC_PI_2);

    let p = QMatrix::from_fn(n, n, |r, col| {
        let u: Vec<Complex64> = v.column(col).iter().copied().collect();
        matrix::quaternion_vector_from_complex(&u)[r]
    });
    let p_inv = p.inverse()?;
    Ok(&(&p * &QMatrix::from_complex(&log_j)) * &p_inv)
}

/// Checks that the standard eigenvalues of `e^A` are the standardized exponentials of
/// the standard eigenvalues of `A`.
pub fn spectral_map_check(a: &QMatrix) -> bool {
    let run = || -> Result<bool> {
        let mapped: Vec<_> = spectrum::standard_eigenvalues(a)?
            .values()
            .into_iter()
            .map(|l| Quaternion::from(l).exp().standardize())
            .collect();
        let direct = spectrum::standard_eigenvalues(&expm(a)?)?.values();
        let scale = mapped.iter().map(|z| z.abs()).fold(1.0, f64::max);
        Ok(multiset_close(&mapped, &direct, EIG_CLUSTER_TOL * scale))
    };
    run().unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quaternion::ComplexPair;
    use crate::spectrum::standard_eigenvalues;
    use crate::testutil::{rand_qmatrix, rng};
    use std::f64::consts::PI;

    fn q(a: f64, b: f64, c: f64, d: f64) -> Quaternion {
        Quaternion::new(a, b, c, d)
    }

    #[test]
    fn exp_of_zero_and_diagonal() {
        assert_eq!(expm(&QMatrix::zeros(3, 3)).unwrap(), QMatrix::identity(3));
        let d = QMatrix::from_diag(&[Quaternion::I.scale(PI), Quaternion::J.scale(PI)]);
        let e = expm(&d).unwrap();
        assert!(e.max_entry_dist(&QMatrix::identity(2).scale(-1.0)) < 1e-14);
    }

    #[test]
    fn exp_matches_scalar_exp_entrywise_on_diagonals() {
        let mut rng = rng(40);
        for _ in 0..20 {
            let d: Vec<Quaternion> = rand_qmatrix(&mut rng, 1, 2.0).entries().to_vec();
            let e = rand_qmatrix(&mut rng, 1, 2.0).entries().to_vec();
            let m = QMatrix::from_diag(&[d[0], e[0]]);
            let x = expm(&m).unwrap();
            assert!((x[(0, 0)] - d[0].exp()).norm() < 1e-13);
            assert!((x[(1, 1)] - e[0].exp()).norm() < 1e-13);
        }
    }

    #[test]
    fn commuting_exponentials_multiply() {
        let mut rng = rng(41);
        for _ in 0..20 {
            let a = rand_qmatrix(&mut rng, 3, 0.7);
            // polynomial in a with real coefficients commutes with a
            let b = &(&(&a * &a).scale(0.3) + &a.scale(-0.5)) + &QMatrix::identity(3).scale(0.2);
            let lhs = &expm(&a).unwrap() * &expm(&b).unwrap();
            let rhs = expm(&(&a + &b)).unwrap();
            assert!(lhs.max_entry_dist(&rhs) < 1e-10 * rhs.max_abs().max(1.0));
        }
    }

    #[test]
    fn log_of_identity_is_zero() {
        let l = logm_with_diagnostics(&QMatrix::identity(3)).unwrap();
        assert_eq!(l.branch, LogBranch::Principal);
        assert!(l.log.max_abs() < 1e-14);
    }

    #[test]
    fn log_of_minus_identity() {
        let c = QMatrix::identity(2).scale(-1.0);
        let l = logm_with_diagnostics(&c).unwrap();
        assert_eq!(l.branch, LogBranch::Structured);
        assert!(expm(&l.log).unwrap().max_entry_dist(&c) < 1e-10);
    }

    #[test]
    fn log_of_defective_negative_block() {
        let c = QMatrix::from_rows(vec![
            vec![Quaternion::real(-1.0), q(-1.0, -1.0, -1.0, -1.0).scale(PI / 4.0)],
            vec![Quaternion::ZERO, Quaternion::real(-1.0)],
        ])
        .unwrap();
        let l = logm_with_diagnostics(&c).unwrap();
        assert!(expm(&l.log).unwrap().max_entry_dist(&c) < 1e-10);
        let s = standard_eigenvalues(&l.log).unwrap();
        assert!(multiset_close(&s.values(), &[ComplexPair::new(0.0, PI); 2], 1e-6));
    }

    #[test]
    fn log_of_mixed_spectrum_with_negative_eigenvalue() {
        let c = QMatrix::from_rows(vec![
            vec![Quaternion::K, q(0.2, -0.1, 0.3, 0.4)],
            vec![Quaternion::ZERO, Quaternion::real(-1.0)],
        ])
        .unwrap();
        let l = logm_with_diagnostics(&c).unwrap();
        assert!(l.residual < 1e-10);
        let s = standard_eigenvalues(&l.log).unwrap();
        assert!(multiset_close(
            &s.values(),
            &[ComplexPair::new(0.0, PI / 2.0), ComplexPair::new(0.0, PI)],
            1e-8
        ));
    }

    #[test]
    fn singular_input_rejected() {
        let mut c = QMatrix::identity(2);
        c[(1, 1)] = Quaternion::ZERO;
        assert!(matches!(logm(&c), Err(Error::Singular { .. })));
    }

    #[test]
    fn exp_log_round_trip_random() {
        let mut rng = rng(42);
        for n in 1..=4 {
            for _ in 0..10 {
                let c = &rand_qmatrix(&mut rng, n, 1.0) + &QMatrix::identity(n).scale(0.5);
                let b = logm(&c).unwrap();
                let back = expm(&b).unwrap();
                assert!((&back - &c).sum_norm() <= LOG_TOL * c.sum_norm());
            }
        }
    }

    #[test]
    fn spectral_map_examples() {
        let a = QMatrix::from_diag(&[Quaternion::I, Quaternion::ONE]);
        assert!(spectral_map_check(&a));
        let mut rng = rng(43);
        for _ in 0..20 {
            assert!(spectral_map_check(&rand_qmatrix(&mut rng, 4, 1.0)));
        }
    }
}
