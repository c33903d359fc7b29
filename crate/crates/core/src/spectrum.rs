//! Standard eigenvalues and right eigenvectors of quaternion matrices.
//!
//! The `2n` eigenvalues of the adjoint `χ_A` come in conjugate pairs; the `n`
//! representatives with nonnegative imaginary part are the standard
//! eigenvalues of `A`. Near-equal values are merged into one entry carrying
//! algebraic and geometric multiplicities.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::matrix::{self, QMatrix};
use crate::quaternion::{ComplexPair, Quaternion};

/// Absolute clustering radius for merging standard eigenvalues.
pub const EIG_CLUSTER_TOL: f64 = 1e-6;
/// Relative tolerance for conjugate pairing, scaled by `max(1, ‖A‖)`.
pub const PAIR_TOL: f64 = 1e-7;
/// Relative rank tolerance, scaled by `‖χ_A‖_F · 2n`.
pub const RANK_TOL: f64 = 1e-9;
/// Eigenvector residual tolerance relative to `‖A‖`.
pub const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub value: ComplexPair,
    pub algebraic: usize,
    pub geometric: usize,
}

/// The `n` standard eigenvalues of an `n×n` quaternion matrix, grouped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardSpectrum {
    pub entries: Vec<SpectrumEntry>,
}

impl StandardSpectrum {
    /// Values repeated by algebraic multiplicity.
    pub fn values(&self) -> Vec<ComplexPair> {
        self.entries
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.value, e.algebraic))
            .collect()
    }

    /// Total algebraic multiplicity.
    pub fn dimension(&self) -> usize {
        self.entries.iter().map(|e| e.algebraic).sum()
    }

    pub fn nearest(&self, z: ComplexPair) -> Option<(&SpectrumEntry, f64)> {
        self.entries
            .iter()
            .map(|e| (e, e.value.dist(z)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn contains(&self, z: ComplexPair, tol: f64) -> bool {
        self.nearest(z).is_some_and(|(_, d)| d <= tol)
    }
}

/// Multiset equality of two lists of complex numbers within `tol`.
pub fn multiset_close(a: &[ComplexPair], b: &[ComplexPair], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    for x in a {
        let best = b
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, y)| (i, x.dist(*y)))
            .min_by(|p, q| p.1.total_cmp(&q.1));
        match best {
            Some((i, d)) if d <= tol => used[i] = true,
            _ => return false,
        }
    }
    true
}

/// Eigenvalue clusters of `χ_A` before multiplicities are attached.
#[derive(Debug, Clone)]
pub(crate) struct Cluster {
    pub value: Complex64,
    pub algebraic: usize,
}

pub(crate) fn pair_tolerance(a: &QMatrix) -> f64 {
    PAIR_TOL * a.sum_norm().max(1.0)
}

/// Pairs the `2n` adjoint eigenvalues and clusters the standard representatives.
pub(crate) fn clusters(a: &QMatrix, chi: &CMatrix) -> Result<Vec<Cluster>> {
    let n = a.rows();
    let mut eigs = linalg::eigenvalues(chi)?;
    let tau_pair = pair_tolerance(a);

    // each eigenvalue, taken by decreasing imaginary part, claims the unused one
    // nearest its conjugate; real eigenvalues therefore pair with their twins
    eigs.sort_by(|x, y| y.im.total_cmp(&x.im).then(y.re.total_cmp(&x.re)));
    let mut used = vec![false; eigs.len()];
    let mut reps = Vec::with_capacity(n);
    for i in 0..eigs.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let u = eigs[i];
        let best = eigs
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, l)| (k, (u - l.conj()).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1));
        match best {
            Some((k, d)) if d <= tau_pair => {
                used[k] = true;
                let mid = (u + eigs[k].conj()) * 0.5;
                reps.push(Complex64::new(mid.re, mid.im.abs()));
            }
            Some((_, d)) => return Err(Error::PairingFailure { residual: d }),
            None => return Err(Error::PairingFailure { residual: f64::INFINITY }),
        }
    }
    debug_assert_eq!(reps.len(), n);

    // single-linkage clustering
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    for z in reps {
        let hits: Vec<usize> = groups
            .iter()
            .enumerate()
            .filter(|(_, g)| g.iter().any(|w| (*w - z).norm() <= EIG_CLUSTER_TOL))
            .map(|(i, _)| i)
            .collect();
        match hits.as_slice() {
            [] => groups.push(vec![z]),
            [first, rest @ ..] => {
                for &r in rest.iter().rev() {
                    let g = groups.remove(r);
                    groups[*first].extend(g);
                }
                groups[*first].push(z);
            }
        }
    }
    Ok(groups
        .into_iter()
        .map(|g| {
            let len = g.len();
            let mean = g.iter().fold(Complex64::new(0.0, 0.0), |a, b| a + b) / len as f64;
            Cluster { value: Complex64::new(mean.re, mean.im.max(0.0)), algebraic: len }
        })
        .collect())
}

fn rank_tolerance(chi: &CMatrix) -> f64 {
    RANK_TOL * linalg::norm_fro(chi).max(1.0) * chi.nrows() as f64
}

fn shifted(chi: &CMatrix, lambda: Complex64) -> CMatrix {
    let mut m = chi.clone();
    for i in 0..m.nrows() {
        m[(i, i)] -= lambda;
    }
    m
}

fn geometric_multiplicity(chi: &CMatrix, c: &Cluster, tau_pair: f64) -> usize {
    let kernel = linalg::null_space(&shifted(chi, c.value), rank_tolerance(chi)).ncols();
    let gm = if c.value.im > tau_pair { kernel } else { kernel / 2 };
    gm.clamp(1, c.algebraic)
}

fn sort_entries(entries: &mut [SpectrumEntry]) {
    entries.sort_by(|a, b| {
        b.value
            .abs()
            .total_cmp(&a.value.abs())
            .then(b.value.re.total_cmp(&a.value.re))
            .then(b.value.im.total_cmp(&a.value.im))
    });
}

/// Standard eigenvalues with algebraic and geometric multiplicities, ordered by
/// decreasing modulus.
pub fn standard_eigenvalues(a: &QMatrix) -> Result<StandardSpectrum> {
    let chi = a.adjoint()?.into_complex();
    let tau_pair = pair_tolerance(a);
    let mut entries: Vec<SpectrumEntry> = clusters(a, &chi)?
        .iter()
        .map(|c| SpectrumEntry {
            value: c.value.into(),
            algebraic: c.algebraic,
            geometric: geometric_multiplicity(&chi, c, tau_pair),
        })
        .collect();
    sort_entries(&mut entries);
    Ok(StandardSpectrum { entries })
}

/// Unit-norm quaternion vector `η` with `Aη = ηλ`, for a standard eigenvalue `λ`.
pub fn right_eigenvector(a: &QMatrix, lambda: ComplexPair) -> Result<Vec<Quaternion>> {
    let spectrum = standard_eigenvalues(a)?;
    let (entry, dist) = spectrum
        .nearest(lambda)
        .ok_or(Error::NotAnEigenvalue { value: lambda.to_string(), distance: f64::INFINITY })?;
    if dist > EIG_CLUSTER_TOL {
        return Err(Error::NotAnEigenvalue { value: lambda.to_string(), distance: dist });
    }
    let lam = Complex64::from(entry.value);
    let chi = a.adjoint()?.into_complex();
    let shifted_chi = shifted(&chi, lam);
    let mut kernel = linalg::null_space(&shifted_chi, rank_tolerance(&chi));
    if kernel.ncols() == 0 {
        // take the best available singular direction and let the residual decide
        kernel = smallest_singular_vectors(&shifted_chi, 1);
    }

    let scale = a.sum_norm().max(f64::MIN_POSITIVE);
    let lam_q = Quaternion::from(entry.value);
    let mut best = f64::INFINITY;
    for col in 0..kernel.ncols() {
        let u: Vec<Complex64> = kernel.column(col).iter().copied().collect();
        for convention in [Convention::Standard, Convention::Flipped] {
            let mut eta = convention.apply(&u);
            let nrm = eta.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt();
            if nrm == 0.0 {
                continue;
            }
            eta.iter_mut().for_each(|q| *q = q.scale(1.0 / nrm));
            let resid = eigen_residual(a, &eta, lam_q);
            if resid <= RESIDUAL_TOL * scale {
                return Ok(eta);
            }
            best = best.min(resid);
        }
    }
    Err(Error::RecoveryFailure { residual: best })
}

/// Sum-norm of `Aη - ηλ`.
pub fn eigen_residual(a: &QMatrix, eta: &[Quaternion], lambda: Quaternion) -> f64 {
    a.mul_vec(eta).iter().zip(eta).map(|(x, e)| (*x - *e * lambda).norm()).sum()
}

#[derive(Clone, Copy)]
enum Convention {
    /// `η = u1 - conj(u2)·j`
    Standard,
    /// `η = u1 + conj(u2)·j`, kept as a fallback in case the residual rejects the first
    Flipped,
}

impl Convention {
    fn apply(self, u: &[Complex64]) -> Vec<Quaternion> {
        match self {
            Convention::Standard => matrix::quaternion_vector_from_complex(u),
            Convention::Flipped => {
                let n = u.len() / 2;
                (0..n).map(|i| Quaternion::from_complex_parts(u[i], u[n + i].conj())).collect()
            }
        }
    }
}

/// Right singular vectors belonging to the `count` smallest singular values.
pub(crate) fn smallest_singular_vectors(a: &CMatrix, count: usize) -> CMatrix {
    let n = a.ncols();
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let cols: Vec<_> = idx.iter().take(count).map(|&i| v_t.row(i).adjoint()).collect();
    if cols.is_empty() {
        CMatrix::zeros(n, 0)
    } else {
        CMatrix::from_columns(&cols)
    }
}
