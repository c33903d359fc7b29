//! Monodromy matrices, characteristic multipliers and exponents, the normal form
//! `M(t) = P(t)·e^{tB}`, and stability classification.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{self, LogBranch};
use crate::integrator::{self, IntegratorConfig};
use crate::matrix::{self, QMatrix};
use crate::quaternion::{ComplexPair, Quaternion};
use crate::spectrum::{self, StandardSpectrum, EIG_CLUSTER_TOL};
use crate::system::MatrixSpec;

/// Half-width of the band around a stability boundary.
pub const STAB_TOL: f64 = 1e-7;
/// Relative tolerance for `‖P(t) − P(t + T)‖`.
pub const PERIODICITY_REL_TOL: f64 = 1e-6;
/// Samples of `P(t)` per period.
pub const SAMPLES_PER_PERIOD: usize = 64;
/// Tolerance for `‖x(T) − x(0)·ρ‖ / ‖x(0)‖` of a periodic witness.
pub const WITNESS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityKind {
    AsymptoticallyStable,
    Stable,
    Unstable,
    Undetermined,
}

impl fmt::Display for StabilityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StabilityKind::AsymptoticallyStable => "asymptotically stable",
            StabilityKind::Stable => "stable but not asymptotically",
            StabilityKind::Unstable => "unstable",
            StabilityKind::Undetermined => "undetermined",
        })
    }
}

/// One tested quantity behind a verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    /// The eigenvalue or multiplier the quantity belongs to, if any.
    pub value: Option<ComplexPair>,
    pub quantity: String,
    pub measured: f64,
    /// The boundary the quantity is compared with.
    pub threshold: f64,
    /// `|measured − threshold| − tolerance`; negative inside the band.
    pub margin: f64,
    pub algebraic: Option<usize>,
    pub geometric: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub kind: StabilityKind,
    pub evidence: Vec<Evidence>,
}

/// Signed distance to the boundary (negative means the decaying side) with multiplicities.
#[derive(Debug, Clone, Copy)]
struct Mode {
    deviation: f64,
    algebraic: usize,
    geometric: usize,
}

fn decide(modes: &[Mode], tol: f64) -> StabilityKind {
    if modes.iter().all(|m| m.deviation < -tol) {
        return StabilityKind::AsymptoticallyStable;
    }
    let unstable = modes
        .iter()
        .any(|m| m.deviation > tol || (m.deviation.abs() <= tol && m.geometric < m.algebraic));
    if unstable {
        StabilityKind::Unstable
    } else {
        StabilityKind::Stable
    }
}

/// The verdict at `tol`, or `Undetermined` if it changes when `tol` moves by a decade.
fn decide_robust(modes: &[Mode], tol: f64) -> StabilityKind {
    let kind = decide(modes, tol);
    if decide(modes, tol / 10.0) == kind && decide(modes, tol * 10.0) == kind {
        kind
    } else {
        StabilityKind::Undetermined
    }
}

fn verdict_from(spectrum: &StandardSpectrum, quantity: &str, threshold: f64, f: impl Fn(ComplexPair) -> f64) -> StabilityVerdict {
    let mut modes = Vec::new();
    let mut evidence = Vec::new();
    for e in &spectrum.entries {
        let measured = f(e.value);
        modes.push(Mode { deviation: measured - threshold, algebraic: e.algebraic, geometric: e.geometric });
        evidence.push(Evidence {
            value: Some(e.value),
            quantity: quantity.to_string(),
            measured,
            threshold,
            margin: (measured - threshold).abs() - STAB_TOL,
            algebraic: Some(e.algebraic),
            geometric: Some(e.geometric),
        });
    }
    StabilityVerdict { kind: decide_robust(&modes, STAB_TOL), evidence }
}

/// Stability of `ẋ = A·x` from the real parts of the standard eigenvalues of `A`.
pub fn classify_constant(a: &QMatrix) -> Result<StabilityVerdict> {
    let spectrum = spectrum::standard_eigenvalues(a)?;
    Ok(classify_eigenvalues(&spectrum))
}

pub fn classify_eigenvalues(spectrum: &StandardSpectrum) -> StabilityVerdict {
    verdict_from(spectrum, "re(lambda)", 0.0, |z| z.re)
}

/// Stability of a periodic system from the moduli of its characteristic multipliers.
pub fn classify_multipliers(multipliers: &StandardSpectrum) -> StabilityVerdict {
    verdict_from(multipliers, "|rho|", 1.0, |z| z.abs())
}

pub fn classify_periodic(fd: &FloquetData) -> StabilityVerdict {
    classify_multipliers(&fd.multipliers)
}

/// `M(0)⁻¹·M(T)` for the fundamental matrix with `M(0) = m0`.
pub fn monodromy_from(spec: &MatrixSpec, cfg: &IntegratorConfig, m0: &QMatrix) -> Result<QMatrix> {
    let period = spec.check_periodic()?;
    let traj = integrator::integrate(spec, 0.0, period, m0, cfg)?;
    Ok(&m0.inverse()? * traj.final_state())
}

/// `M(T)` for the principal fundamental matrix.
pub fn monodromy(spec: &MatrixSpec, cfg: &IntegratorConfig) -> Result<QMatrix> {
    monodromy_from(spec, cfg, &QMatrix::identity(spec.n()))
}

pub fn characteristic_multipliers(mono: &QMatrix) -> Result<StandardSpectrum> {
    let qdet = mono.qdet()?;
    if qdet <= functions::singular_threshold(mono) {
        return Err(Error::Singular { qdet });
    }
    spectrum::standard_eigenvalues(mono)
}

/// `μ = (ln|ρ| + i·arg ρ)/T` for every multiplier, repeated by multiplicity.
pub fn characteristic_exponents(multipliers: &StandardSpectrum, period: f64) -> Result<Vec<ComplexPair>> {
    multipliers
        .values()
        .into_iter()
        .map(|rho| {
            let r = rho.abs();
            if r == 0.0 {
                return Err(Error::ZeroMultiplier);
            }
            Ok(ComplexPair::new(r.ln() / period, rho.im.atan2(rho.re).abs() / period))
        })
        .collect()
}

/// Everything the normal form provides for one periodic system.
#[derive(Debug, Clone, Serialize)]
pub struct FloquetData {
    pub period: f64,
    pub monodromy: QMatrix,
    /// `T·B` is a logarithm of the monodromy matrix.
    pub b: QMatrix,
    pub log_branch: LogBranch,
    pub multipliers: StandardSpectrum,
    pub exponents: Vec<ComplexPair>,
    pub b_spectrum: StandardSpectrum,
    /// Sample times covering `[0, 2T]`.
    pub times: Vec<f64>,
    pub fundamental: Vec<QMatrix>,
    pub p_samples: Vec<QMatrix>,
    /// `max ‖P(t) − P(t + T)‖` over the samples in `[0, T]`.
    pub periodicity_residual: f64,
    pub periodicity_tolerance: f64,
    /// `‖e^{TB} − M(T)‖ / max(1, ‖M(T)‖)`.
    pub log_residual: f64,
}

impl FloquetData {
    /// `P(t)` on `[0, T]`.
    pub fn p_on_period(&self) -> impl Iterator<Item = (f64, &QMatrix)> {
        self.times.iter().copied().zip(&self.p_samples).take(SAMPLES_PER_PERIOD + 1)
    }
}

pub fn normal_form(spec: &MatrixSpec, cfg: &IntegratorConfig) -> Result<FloquetData> {
    let period = spec.check_periodic()?;
    let n = SAMPLES_PER_PERIOD;
    let mut grid: Vec<f64> = (0..=2 * n).map(|k| period * k as f64 / n as f64).collect();
    grid[n] = period;
    grid[2 * n] = 2.0 * period;
    let traj = integrator::integrate_with_stops(spec, 0.0, 2.0 * period, &QMatrix::identity(spec.n()), cfg, &grid)?;
    let fundamental: Vec<QMatrix> = grid
        .iter()
        .map(|&t| traj.sample_at(t).cloned().unwrap_or_else(|| traj.at(t)))
        .collect();

    let mono = fundamental[n].clone();
    let multipliers = characteristic_multipliers(&mono)?;
    let exponents = characteristic_exponents(&multipliers, period)?;
    let log = functions::logm_with_diagnostics(&mono)?;
    let b = log.log.scale(1.0 / period);
    let b_spectrum = spectrum::standard_eigenvalues(&b)?;

    let p_samples = grid
        .iter()
        .zip(&fundamental)
        .map(|(&t, m)| Ok(m * &functions::expm(&b.scale(-t))?))
        .collect::<Result<Vec<_>>>()?;
    let residual = (0..=n).map(|k| (&p_samples[k] - &p_samples[k + n]).sum_norm()).fold(0.0, f64::max);
    let tolerance = PERIODICITY_REL_TOL * p_samples.iter().map(QMatrix::sum_norm).fold(0.0, f64::max);
    if residual > tolerance {
        return Err(Error::PeriodicityViolation { residual, tolerance });
    }
    Ok(FloquetData {
        period,
        monodromy: mono,
        b,
        log_branch: log.branch,
        multipliers,
        exponents,
        b_spectrum,
        times: grid,
        fundamental,
        p_samples,
        periodicity_residual: residual,
        periodicity_tolerance: tolerance,
        log_residual: log.residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodicKind {
    /// `ρ = 1`: `x(t + T) = x(t)`.
    TPeriodic,
    /// `ρ = −1`: `x(t + T) = −x(t)`, so `x` has period `2T`.
    TwoTPeriodic,
}

/// A solution `x(t) = M(t)·η` that is `T`- or `2T`-periodic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicSolution {
    pub kind: PeriodicKind,
    pub multiplier: ComplexPair,
    pub eta: Vec<Quaternion>,
    /// `‖x(T) − x(0)·ρ‖ / ‖x(0)‖`.
    pub residual: f64,
    /// `‖x(mT) − x(0)‖ / ‖x(0)‖` with `m` the period multiple of `kind`.
    pub return_residual: f64,
}

/// Periodic solutions from multipliers equal to `±1`.
pub fn periodic_solutions(fd: &FloquetData) -> Vec<PeriodicSolution> {
    let mut out = Vec::new();
    let n = SAMPLES_PER_PERIOD;
    for entry in &fd.multipliers.entries {
        let (kind, rho, end) = if entry.value.dist(ComplexPair::new(1.0, 0.0)) <= EIG_CLUSTER_TOL {
            (PeriodicKind::TPeriodic, 1.0, &fd.fundamental[n])
        } else if entry.value.dist(ComplexPair::new(-1.0, 0.0)) <= EIG_CLUSTER_TOL {
            (PeriodicKind::TwoTPeriodic, -1.0, &fd.fundamental[2 * n])
        } else {
            continue;
        };
        let Ok(eta) = spectrum::right_eigenvector(&fd.monodromy, entry.value) else {
            continue;
        };
        let x0 = matrix::vec_sum_norm(&eta);
        let after_t = fd.monodromy.mul_vec(&eta);
        let residual = after_t.iter().zip(&eta).map(|(x, e)| (*x - e.scale(rho)).norm()).sum::<f64>() / x0;
        let back = end.mul_vec(&eta);
        let return_residual = back.iter().zip(&eta).map(|(x, e)| (*x - *e).norm()).sum::<f64>() / x0;
        if residual <= WITNESS_TOL {
            out.push(PeriodicSolution { kind, multiplier: entry.value, eta, residual, return_residual });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductCheck {
    /// `∫₀ᵀ Re tr A`.
    pub trace_integral: f64,
    /// `|Π|ρⱼ| − e^{∫Re tr A}| / e^{∫Re tr A}`.
    pub product_residual: f64,
    /// `|Re Σμⱼ − (1/T)∫Re tr A|`.
    pub exponent_residual: f64,
}

pub fn multiplier_product_check(fd: &FloquetData, spec: &MatrixSpec) -> Result<ProductCheck> {
    let integral = integrator::re_trace_integral(spec, 0.0, &[fd.period])?[0];
    let product: f64 = fd.multipliers.values().iter().map(|r| r.abs()).product();
    let expected = integral.exp();
    let re_sum: f64 = fd.exponents.iter().map(|m| m.re).sum();
    Ok(ProductCheck {
        trace_integral: integral,
        product_residual: (product - expected).abs() / expected,
        exponent_residual: (re_sum - integral / fd.period).abs(),
    })
}

/// Long-run behaviour of `‖M(t)‖` from samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormBehavior {
    Unbounded,
    DecaysToZero,
    Bounded,
}

impl fmt::Display for NormBehavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormBehavior::Unbounded => "unbounded",
            NormBehavior::DecaysToZero => "tends to 0",
            NormBehavior::Bounded => "bounded, not tending to 0",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormProfile {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
}

impl NormProfile {
    /// Compares the last tenth of the horizon with the initial norm.
    pub fn behavior(&self) -> NormBehavior {
        let initial = self.norms[0];
        let tail_start = self.norms.len() - (self.norms.len() / 10).max(1);
        let tail_max = self.norms[tail_start..].iter().copied().fold(0.0, f64::max);
        if tail_max > 10.0 * initial {
            NormBehavior::Unbounded
        } else if tail_max < 0.1 * initial {
            NormBehavior::DecaysToZero
        } else {
            NormBehavior::Bounded
        }
    }
}

/// `‖M(t)‖` on `[0, periods·T]`, using `M(t + kT) = M(t)·M(T)^k`.
pub fn norm_profile(fd: &FloquetData, periods: usize) -> NormProfile {
    let mut times = Vec::new();
    let mut norms = Vec::new();
    let mut power = QMatrix::identity(fd.monodromy.rows());
    for k in 0..periods {
        for (j, m) in fd.fundamental.iter().take(SAMPLES_PER_PERIOD).enumerate() {
            times.push(k as f64 * fd.period + fd.times[j]);
            norms.push((m * &power).sum_norm());
        }
        power = &power * &fd.monodromy;
    }
    times.push(periods as f64 * fd.period);
    norms.push(power.sum_norm());
    NormProfile { times, norms }
}

/// `‖e^{tA}‖` at `samples + 1` evenly spaced times on `[0, horizon]`.
pub fn constant_norm_profile(a: &QMatrix, horizon: f64, samples: usize) -> Result<NormProfile> {
    let step = functions::expm(&a.scale(horizon / samples as f64))?;
    let mut m = QMatrix::identity(a.rows());
    let mut times = vec![0.0];
    let mut norms = vec![m.sum_norm()];
    for k in 1..=samples {
        m = &m * &step;
        times.push(horizon * k as f64 / samples as f64);
        norms.push(m.sum_norm());
    }
    Ok(NormProfile { times, norms })
}
