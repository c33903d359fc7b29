use qfloquet::floquet::{
    self, constant_norm_profile, multiplier_product_check, norm_profile, periodic_solutions, NormBehavior, PeriodicSolution,
    ProductCheck,
};
use qfloquet::hill::{self, HillProblem};
use qfloquet::integrator::integrate_with_stops;
use qfloquet::{
    normal_form, ComplexPair, Expr, IntegratorConfig, LogBranch, MatrixSpec, QMatrix, StabilityKind, StabilityVerdict,
    StandardSpectrum,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{AnalysisConfig, Mode};
use crate::error::{CliError, Result};

/// Horizon and sample count for the fundamental-matrix summary of a constant system.
pub const CONSTANT_HORIZON: f64 = 20.0;
pub const CONSTANT_SAMPLES: usize = 200;
/// Periods used for the fundamental-matrix summary of a periodic system.
pub const PERIODIC_HORIZON: usize = 20;
/// Sample count for the trajectory CSV of a constant system over `[0, 10]`.
pub const TRAJECTORY_SAMPLES: usize = 100;
pub const TRAJECTORY_HORIZON: f64 = 10.0;

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub config: AnalysisConfig,
    pub result: Analysis,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    Constant(ConstantReport),
    Periodic(PeriodicReport),
    Hill(HillOutput),
    Sweep(Vec<SweepRow>),
}

/// Samples of `M(t)` for CSV output.
#[derive(Debug, Clone, Default)]
pub struct Samples {
    pub times: Vec<f64>,
    pub states: Vec<QMatrix>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantReport {
    pub matrix: QMatrix,
    pub eigenvalues: StandardSpectrum,
    pub fundamental: NormBehavior,
    pub verdict: StabilityVerdict,
    #[serde(skip)]
    pub samples: Samples,
}

#[derive(Debug, Clone, Serialize)]
pub struct PeriodicReport {
    pub period: f64,
    pub monodromy: QMatrix,
    pub multipliers: StandardSpectrum,
    pub exponents: Vec<ComplexPair>,
    pub b: QMatrix,
    pub log_branch: LogBranch,
    pub log_residual: f64,
    pub b_spectrum: StandardSpectrum,
    pub periodicity_residual: f64,
    pub periodicity_tolerance: f64,
    pub product_check: ProductCheck,
    pub periodic_solutions: Vec<PeriodicSolution>,
    pub fundamental: NormBehavior,
    pub verdict: StabilityVerdict,
    #[serde(skip)]
    pub samples: Samples,
}

#[derive(Debug, Clone, Serialize)]
pub struct HillOutput {
    pub period: f64,
    pub coefficient: String,
    #[serde(flatten)]
    pub report: hill::HillReport,
    /// The classical trace table, present when `a(t)` is real.
    pub verdict_real: Option<StabilityVerdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: f64,
    pub re_trace: Option<f64>,
    pub frob_sq: Option<f64>,
    pub abs_rho1: Option<f64>,
    pub abs_rho2: Option<f64>,
    pub verdict_trace: Option<StabilityKind>,
    pub verdict_frobenius: Option<StabilityKind>,
    pub verdict_multipliers: Option<StabilityKind>,
    pub error: Option<String>,
}

pub fn run(cfg: &AnalysisConfig) -> Result<Report> {
    let result = match cfg.mode {
        Mode::Constant => Analysis::Constant(constant(cfg)?),
        Mode::Periodic => Analysis::Periodic(periodic(cfg)?),
        Mode::Hill => Analysis::Hill(hill_analysis(cfg)?),
        Mode::Sweep => Analysis::Sweep(sweep(cfg)?),
    };
    Ok(Report { config: cfg.clone(), result })
}

/// Parses every entry, reporting the failing position.
fn matrix_spec(rows: &[Vec<String>], period: Option<f64>) -> Result<MatrixSpec> {
    let n = rows.len();
    let mut entries = Vec::with_capacity(n * n);
    for (r, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(CliError::Usage(format!("row {} has {} entries, expected {n}", r + 1, row.len())));
        }
        for (c, src) in row.iter().enumerate() {
            let expr = qfloquet::parse(src).map_err(|e| CliError::from_core(format!("entry ({}, {}) `{src}`", r + 1, c + 1), e))?;
            entries.push(expr);
        }
    }
    MatrixSpec::new(n, entries, period).map_err(|e| CliError::from_core("matrix", e))
}

fn constant(cfg: &AnalysisConfig) -> Result<ConstantReport> {
    let spec = matrix_spec(cfg.require_entries()?, None)?;
    if spec.depends_on_time() {
        return Err(CliError::Usage("constant mode entries must not depend on t".into()));
    }
    let icfg = cfg.integrator_config()?;
    let a = spec.eval(0.0).map_err(|e| CliError::from_core("matrix", e))?;
    let eigenvalues = qfloquet::standard_eigenvalues(&a).map_err(|e| CliError::from_core("eigenvalues", e))?;
    let verdict = floquet::classify_eigenvalues(&eigenvalues);
    let fundamental = constant_norm_profile(&a, CONSTANT_HORIZON, CONSTANT_SAMPLES)
        .map_err(|e| CliError::from_core("fundamental matrix", e))?
        .behavior();
    let times: Vec<f64> =
        (0..=TRAJECTORY_SAMPLES).map(|k| TRAJECTORY_HORIZON * k as f64 / TRAJECTORY_SAMPLES as f64).collect();
    let traj = integrate_with_stops(&spec, 0.0, TRAJECTORY_HORIZON, &QMatrix::identity(spec.n()), &icfg, &times)
        .map_err(|e| CliError::from_core("integration", e))?;
    let states = times.iter().map(|&t| traj.sample_at(t).cloned().unwrap_or_else(|| traj.at(t))).collect();
    Ok(ConstantReport { matrix: a, eigenvalues, fundamental, verdict, samples: Samples { times, states } })
}

fn periodic(cfg: &AnalysisConfig) -> Result<PeriodicReport> {
    let period = cfg.require_period()?;
    let spec = matrix_spec(cfg.require_entries()?, Some(period))?;
    let icfg = cfg.integrator_config()?;
    let fd = normal_form(&spec, &icfg).map_err(|e| CliError::from_core("normal form", e))?;
    let product_check = multiplier_product_check(&fd, &spec).map_err(|e| CliError::from_core("product check", e))?;
    Ok(PeriodicReport {
        period,
        verdict: floquet::classify_periodic(&fd),
        fundamental: norm_profile(&fd, PERIODIC_HORIZON).behavior(),
        periodic_solutions: periodic_solutions(&fd),
        product_check,
        samples: Samples { times: fd.times.clone(), states: fd.fundamental.clone() },
        monodromy: fd.monodromy,
        multipliers: fd.multipliers,
        exponents: fd.exponents,
        b: fd.b,
        log_branch: fd.log_branch,
        log_residual: fd.log_residual,
        b_spectrum: fd.b_spectrum,
        periodicity_residual: fd.periodicity_residual,
        periodicity_tolerance: fd.periodicity_tolerance,
    })
}

fn hill_output(expr: Expr, source: String, period: f64, icfg: &IntegratorConfig) -> Result<HillOutput> {
    let problem = HillProblem::new(expr, period);
    let report = hill::analyze(&problem, icfg).map_err(|e| CliError::from_core("Hill analysis", e))?;
    let verdict_real = match hill::check_real(&problem) {
        Ok(()) => Some(hill::classify_real_monodromy(&report.monodromy)),
        Err(qfloquet::Error::NotRealCoefficient { .. }) => None,
        Err(e) => return Err(CliError::from_core("coefficient", e)),
    };
    Ok(HillOutput { period, coefficient: source, report, verdict_real })
}

fn hill_analysis(cfg: &AnalysisConfig) -> Result<HillOutput> {
    let period = cfg.require_period()?;
    let src = cfg.require_coefficient()?;
    let expr = qfloquet::parse(src).map_err(|e| CliError::from_core(format!("coefficient `{src}`"), e))?;
    hill_output(expr, src.to_string(), period, &cfg.integrator_config()?)
}

fn sweep(cfg: &AnalysisConfig) -> Result<Vec<SweepRow>> {
    let period = cfg.require_period()?;
    let src = cfg.require_coefficient()?;
    let grid = cfg.sweep.as_ref().ok_or_else(|| CliError::Usage("sweep mode requires a parameter grid".into()))?;
    let points = grid.points()?;
    let expr = qfloquet::expr::parse_with_params(src, &[grid.param.as_str()])
        .map_err(|e| CliError::from_core(format!("coefficient `{src}`"), e))?;
    let icfg = cfg.integrator_config()?;
    let jobs = grid.jobs.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let row = |p: f64| -> SweepRow {
        match hill_output(expr.bind(&grid.param, p), src.to_string(), period, &icfg) {
            Ok(out) => {
                let moduli: Vec<f64> = out.report.multipliers.values().iter().map(|z| z.abs()).collect();
                SweepRow {
                    p,
                    re_trace: Some(out.report.re_trace),
                    frob_sq: Some(out.report.frob_sq),
                    abs_rho1: moduli.first().copied(),
                    abs_rho2: moduli.get(1).copied(),
                    verdict_trace: Some(out.report.verdict_trace.kind),
                    verdict_frobenius: Some(out.report.verdict_frobenius.kind),
                    verdict_multipliers: Some(out.report.verdict_multipliers.kind),
                    error: None,
                }
            }
            Err(e) => SweepRow {
                p,
                re_trace: None,
                frob_sq: None,
                abs_rho1: None,
                abs_rho2: None,
                verdict_trace: None,
                verdict_frobenius: None,
                verdict_multipliers: None,
                error: Some(e.to_string()),
            },
        }
    };
    Ok(pool.install(|| points.par_iter().map(|&p| row(p)).collect()))
}
