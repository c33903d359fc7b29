//! Hill's equation `ü + a(t)·u = 0` with a quaternion-valued periodic coefficient.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::floquet::{self, Evidence, StabilityKind, StabilityVerdict};
use crate::integrator::{self, IntegratorConfig};
use crate::matrix::QMatrix;
use crate::spectrum::{self, StandardSpectrum};
use crate::system::{MatrixSpec, PERIODICITY_GRID};

/// Band around `Re tr M(T) = ±2` and around `‖M(T)‖_F² = 2`.
pub const TRACE_TOL: f64 = 1e-6;
/// Tolerance for `M(T) = ±I`.
pub const IDENTITY_TOL: f64 = 1e-6;
/// Largest `|Ve a(t)|` accepted as a real coefficient.
pub const REAL_COEFF_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct HillProblem {
    pub a: Expr,
    pub period: f64,
}

impl HillProblem {
    pub fn new(a: Expr, period: f64) -> Self {
        Self { a, period }
    }

    pub fn parse(a: &str, period: f64) -> Result<Self> {
        Ok(Self::new(crate::expr::parse(a)?, period))
    }
}

/// The first-order system `[[0, 1], [−a(t), 0]]` for `x = (u, u̇)`.
pub fn companion(p: &HillProblem) -> Result<MatrixSpec> {
    let zero = Expr::Num(0.0);
    let one = Expr::Num(1.0);
    let minus_a = Expr::Neg(Box::new(p.a.clone()));
    MatrixSpec::new(2, vec![zero.clone(), one, minus_a, zero], Some(p.period))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KDiagnostics {
    /// Eigenvalues of `K = M·M†`, descending.
    pub kappa: [f64; 2],
    /// `max |κᵢ² − ‖M‖_F²·κᵢ + 1|`.
    pub root_residual: f64,
}

/// Spectrum of `K(T) = M(T)·M(T)†`, a Hermitian positive semidefinite matrix.
pub fn k_matrix_diagnostics(m: &QMatrix) -> Result<KDiagnostics> {
    if m.rows() != 2 || m.cols() != 2 {
        return Err(Error::DimensionMismatch { expected: "2x2".into(), found: format!("{}x{}", m.rows(), m.cols()) });
    }
    let k = m * &m.conj_transpose();
    let mut kappa: Vec<f64> = spectrum::standard_eigenvalues(&k)?.values().iter().map(|z| z.re.max(0.0)).collect();
    kappa.sort_by(|a, b| b.total_cmp(a));
    let frob = m.frobenius_sq();
    let root_residual = kappa.iter().map(|x| (x * x - frob * x + 1.0).abs()).fold(0.0, f64::max);
    Ok(KDiagnostics { kappa: [kappa[0], kappa[1]], root_residual })
}

#[derive(Debug, Clone, Serialize)]
pub struct HillReport {
    pub monodromy: QMatrix,
    pub re_trace: f64,
    pub frob_sq: f64,
    pub qdet: f64,
    pub multipliers: StandardSpectrum,
    pub k: KDiagnostics,
    /// `Re ρ₁ + Re ρ₂ − Re tr M(T)`.
    pub trace_identity_residual: f64,
    /// `|ρ₁|·|ρ₂| − 1`.
    pub modulus_product_residual: f64,
    pub verdict_trace: StabilityVerdict,
    pub verdict_frobenius: StabilityVerdict,
    /// Authoritative: the Floquet classification of the multipliers.
    pub verdict_multipliers: StabilityVerdict,
}

fn evidence(quantity: &str, measured: f64, threshold: f64, tol: f64) -> Evidence {
    Evidence {
        value: None,
        quantity: quantity.to_string(),
        measured,
        threshold,
        margin: (measured - threshold).abs() - tol,
        algebraic: None,
        geometric: None,
    }
}

/// `M(T) = ±I` test used on the boundary rows of both trace tables.
fn boundary_verdict(m: &QMatrix, sign: f64, quantity: &str, measured: f64) -> StabilityVerdict {
    let dist = (m - &QMatrix::identity(2).scale(sign)).sum_norm();
    let kind = if dist <= IDENTITY_TOL { StabilityKind::Stable } else { StabilityKind::Unstable };
    let label = if sign > 0.0 { "||M(T) - I||" } else { "||M(T) + I||" };
    StabilityVerdict {
        kind,
        evidence: vec![evidence(quantity, measured, 2.0 * sign, TRACE_TOL), evidence(label, dist, 0.0, IDENTITY_TOL)],
    }
}

/// Classification by `Re tr M(T)` for a quaternion coefficient.
pub fn trace_verdict(m: &QMatrix) -> StabilityVerdict {
    let re_trace = m.trace().re();
    if (re_trace - 2.0).abs() <= TRACE_TOL {
        return boundary_verdict(m, 1.0, "re(tr M(T))", re_trace);
    }
    if (re_trace + 2.0).abs() <= TRACE_TOL {
        return boundary_verdict(m, -1.0, "re(tr M(T))", re_trace);
    }
    let kind = if re_trace.abs() > 2.0 { StabilityKind::Unstable } else { StabilityKind::Undetermined };
    let threshold = if re_trace >= 0.0 { 2.0 } else { -2.0 };
    StabilityVerdict { kind, evidence: vec![evidence("re(tr M(T))", re_trace, threshold, TRACE_TOL)] }
}

/// `‖M(T)‖_F² > 2` proves instability; otherwise this channel says nothing.
pub fn frobenius_verdict(m: &QMatrix) -> StabilityVerdict {
    let frob = m.frobenius_sq();
    let kind = if frob > 2.0 + TRACE_TOL { StabilityKind::Unstable } else { StabilityKind::Undetermined };
    StabilityVerdict { kind, evidence: vec![evidence("||M(T)||_F^2", frob, 2.0, TRACE_TOL)] }
}

fn hill_monodromy(p: &HillProblem, cfg: &IntegratorConfig) -> Result<QMatrix> {
    floquet::monodromy(&companion(p)?, cfg)
}

pub fn analyze(p: &HillProblem, cfg: &IntegratorConfig) -> Result<HillReport> {
    let m = hill_monodromy(p, cfg)?;
    report_from_monodromy(m)
}

/// Builds the report for an already computed monodromy matrix.
pub fn report_from_monodromy(m: QMatrix) -> Result<HillReport> {
    let multipliers = floquet::characteristic_multipliers(&m)?;
    let values = multipliers.values();
    let re_trace = m.trace().re();
    Ok(HillReport {
        re_trace,
        frob_sq: m.frobenius_sq(),
        qdet: m.qdet()?,
        k: k_matrix_diagnostics(&m)?,
        trace_identity_residual: values.iter().map(|z| z.re).sum::<f64>() - re_trace,
        modulus_product_residual: values.iter().map(|z| z.abs()).product::<f64>() - 1.0,
        verdict_trace: trace_verdict(&m),
        verdict_frobenius: frobenius_verdict(&m),
        verdict_multipliers: floquet::classify_multipliers(&multipliers),
        multipliers,
        monodromy: m,
    })
}

/// Fails unless `a(t)` is real on a grid over one period.
pub fn check_real(p: &HillProblem) -> Result<()> {
    for k in 0..PERIODICITY_GRID {
        let t = p.period * k as f64 / PERIODICITY_GRID as f64;
        let magnitude = p.a.eval(t)?.ve_norm();
        if magnitude > REAL_COEFF_TOL {
            return Err(Error::NotRealCoefficient { t, magnitude });
        }
    }
    Ok(())
}

/// The classical table for a real coefficient, where `M(T)` is a real matrix.
pub fn classify_real(p: &HillProblem, cfg: &IntegratorConfig) -> Result<StabilityVerdict> {
    check_real(p)?;
    let m = hill_monodromy(p, cfg)?;
    Ok(classify_real_monodromy(&m))
}

pub fn classify_real_monodromy(m: &QMatrix) -> StabilityVerdict {
    let tr = m.trace().re();
    if (tr - 2.0).abs() <= TRACE_TOL {
        return boundary_verdict(m, 1.0, "tr M(T)", tr);
    }
    if (tr + 2.0).abs() <= TRACE_TOL {
        return boundary_verdict(m, -1.0, "tr M(T)", tr);
    }
    let kind = if tr.abs() > 2.0 { StabilityKind::Unstable } else { StabilityKind::Stable };
    let threshold = if tr >= 0.0 { 2.0 } else { -2.0 };
    StabilityVerdict { kind, evidence: vec![evidence("tr M(T)", tr, threshold, TRACE_TOL)] }
}

/// `qdet M(t)` deviation from 1 along the companion flow over one period.
pub fn liouville_deviation(p: &HillProblem, cfg: &IntegratorConfig) -> Result<f64> {
    let spec = companion(p)?;
    let traj = integrator::integrate(&spec, 0.0, p.period, &QMatrix::identity(2), cfg)?;
    integrator::liouville_residual(&traj, &spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quaternion::Quaternion;
    use crate::testutil::{rand_qmatrix, rng};
    use std::f64::consts::PI;

    /// Eigenvalues of a 2×2 Hermitian quaternion matrix `[[a, b], [b̄, d]]`.
    fn hermitian_2x2_eigs(k: &QMatrix) -> [f64; 2] {
        let a = k[(0, 0)].re();
        let d = k[(1, 1)].re();
        let b = k[(0, 1)].norm();
        let mid = (a + d) / 2.0;
        let rad = (((a - d) / 2.0).powi(2) + b * b).sqrt();
        [mid + rad, mid - rad]
    }

    #[test]
    fn companion_entries() {
        let zero = companion(&HillProblem::parse("0", 1.0).unwrap()).unwrap().eval(0.3).unwrap();
        assert_eq!(zero, QMatrix::from_rows(vec![vec![Quaternion::ZERO, Quaternion::ONE], vec![Quaternion::ZERO, Quaternion::ZERO]]).unwrap());
        let ex9 = companion(&HillProblem::parse("2 + j*cos(2*t)^2 + k*sin(2*t)", PI).unwrap()).unwrap();
        assert_eq!(ex9.eval(0.0).unwrap()[(1, 0)], Quaternion::new(-2.0, 0.0, -1.0, 0.0));
        let ex10 = companion(&HillProblem::parse("-1 + j*cos(2*t) + k*sin(2*t)", PI).unwrap()).unwrap();
        assert_eq!(ex10.eval(0.0).unwrap()[(1, 0)], Quaternion::new(1.0, 0.0, -1.0, 0.0));
    }

    #[test]
    fn k_diagnostics_identity_and_unitary() {
        let d = k_matrix_diagnostics(&QMatrix::identity(2)).unwrap();
        assert!((d.kappa[0] - 1.0).abs() < 1e-12 && (d.kappa[1] - 1.0).abs() < 1e-12);
        assert!(d.root_residual < 1e-12);

        // unitary from a Hermitian generator: e^{S} with S skew-Hermitian
        let mut r = rng(80);
        for _ in 0..10 {
            let x = rand_qmatrix(&mut r, 2, 1.0);
            let skew = &x - &x.conj_transpose();
            let u = crate::functions::expm(&skew).unwrap();
            let d = k_matrix_diagnostics(&u).unwrap();
            assert!((d.kappa[0] - 1.0).abs() < 1e-10 && (d.kappa[1] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn k_eigenvalues_match_closed_form() {
        let mut r = rng(81);
        for _ in 0..50 {
            let m = rand_qmatrix(&mut r, 2, 2.0);
            let k = &m * &m.conj_transpose();
            let oracle = hermitian_2x2_eigs(&k);
            let d = k_matrix_diagnostics(&m).unwrap();
            assert!((d.kappa[0] - oracle[0]).abs() < 1e-9 * oracle[0].max(1.0));
            assert!((d.kappa[1] - oracle[1].max(0.0)).abs() < 1e-9 * oracle[0].max(1.0));
        }
    }

    #[test]
    fn real_closed_forms() {
        let cfg = IntegratorConfig::default();
        let full = HillProblem::parse("1", 2.0 * PI).unwrap();
        assert_eq!(classify_real(&full, &cfg).unwrap().kind, StabilityKind::Stable);
        let half = HillProblem::parse("1", PI).unwrap();
        assert_eq!(classify_real(&half, &cfg).unwrap().kind, StabilityKind::Stable);
        let hyper = HillProblem::parse("-1", PI).unwrap();
        let v = classify_real(&hyper, &cfg).unwrap();
        assert_eq!(v.kind, StabilityKind::Unstable);
        assert!((v.evidence[0].measured - 2.0 * PI.cosh()).abs() < 1e-8);
        let quat = HillProblem::parse("1 + j", PI).unwrap();
        assert!(matches!(classify_real(&quat, &cfg), Err(Error::NotRealCoefficient { .. })));
    }

    #[test]
    fn real_table_interior() {
        // u'' + 0.25u = 0 over T = π: tr M = 2cos(π/2) = 0
        let p = HillProblem::parse("0.25", PI).unwrap();
        let cfg = IntegratorConfig::default();
        assert_eq!(classify_real(&p, &cfg).unwrap().kind, StabilityKind::Stable);
        assert_eq!(analyze(&p, &cfg).unwrap().verdict_multipliers.kind, StabilityKind::Stable);
    }

    #[test]
    fn boundary_rows_require_identity() {
        // M = [[1, 1], [0, 1]] has trace 2 and is not I
        let shear = QMatrix::from_rows(vec![vec![Quaternion::ONE, Quaternion::ONE], vec![Quaternion::ZERO, Quaternion::ONE]]).unwrap();
        assert_eq!(trace_verdict(&shear).kind, StabilityKind::Unstable);
        assert_eq!(classify_real_monodromy(&shear).kind, StabilityKind::Unstable);
        assert_eq!(trace_verdict(&QMatrix::identity(2).scale(-1.0)).kind, StabilityKind::Stable);
        assert_eq!(frobenius_verdict(&QMatrix::identity(2)).kind, StabilityKind::Undetermined);
    }

    #[test]
    fn example_nine_invariants() {
        let p = HillProblem::parse("2 + j*cos(2*t)^2 + k*sin(2*t)", PI).unwrap();
        let cfg = IntegratorConfig::default();
        let r = analyze(&p, &cfg).unwrap();
        assert!((r.qdet - 1.0).abs() < 1e-6);
        assert!(r.trace_identity_residual.abs() < 1e-5);
        assert!(r.modulus_product_residual.abs() < 1e-5);
        assert!((r.k.kappa[0] * r.k.kappa[1] - 1.0).abs() < 1e-4);
        assert!(liouville_deviation(&p, &cfg).unwrap() < 1e-8);
    }
}
