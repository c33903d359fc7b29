//! Runge–Kutta integration of `Ṁ = A(t)·M`.
//!
//! The vector field is real-linear in `M`, so the usual Runge–Kutta schemes
//! apply to quaternion matrices unchanged as long as `A(t)` multiplies from the
//! left.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::QMatrix;
use crate::system::MatrixSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rk4Fixed { step: f64 },
    Dp54Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub method: Method,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-12, max_step: f64::INFINITY, method: Method::Dp54Adaptive }
    }
}

impl IntegratorConfig {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self { rel_tol, abs_tol, ..Self::default() }
    }

    pub fn rk4(step: f64) -> Self {
        Self { method: Method::Rk4Fixed { step }, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && !v.is_nan() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")))
            }
        };
        positive("rel_tol", self.rel_tol)?;
        positive("abs_tol", self.abs_tol)?;
        positive("max_step", self.max_step)?;
        if let Method::Rk4Fixed { step } = self.method {
            positive("step", step)?;
        }
        Ok(())
    }
}

/// A state space the steppers can work in.
pub trait State: Clone {
    /// `self + Σ cᵢ·xᵢ`.
    fn combine(&self, terms: &[(f64, &Self)]) -> Self;
    /// Sum of entry moduli.
    fn magnitude(&self) -> f64;
    /// Largest `|eᵢ| / (atol + rtol·max(|aᵢ|, |bᵢ|))` over the entries of `self`.
    fn error_ratio(&self, a: &Self, b: &Self, atol: f64, rtol: f64) -> f64;
    fn all_finite(&self) -> bool;
}

impl State for QMatrix {
    fn combine(&self, terms: &[(f64, &Self)]) -> Self {
        let mut out = self.clone();
        for (c, x) in terms {
            if *c != 0.0 {
                out.axpy(*c, x);
            }
        }
        out
    }

    fn magnitude(&self) -> f64 {
        self.sum_norm()
    }

    fn error_ratio(&self, a: &Self, b: &Self, atol: f64, rtol: f64) -> f64 {
        self.entries()
            .iter()
            .zip(a.entries().iter().zip(b.entries()))
            .map(|(e, (x, y))| e.norm() / (atol + rtol * x.norm().max(y.norm())))
            .fold(0.0, f64::max)
    }

    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

impl State for f64 {
    fn combine(&self, terms: &[(f64, &Self)]) -> Self {
        terms.iter().fold(*self, |acc, (c, x)| acc + c * **x)
    }

    fn magnitude(&self) -> f64 {
        self.abs()
    }

    fn error_ratio(&self, a: &Self, b: &Self, atol: f64, rtol: f64) -> f64 {
        self.abs() / (atol + rtol * a.abs().max(b.abs()))
    }

    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

/// Samples `(tₖ, yₖ, ẏₖ)` of an integrated solution.
#[derive(Debug, Clone)]
pub struct Solution<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub derivatives: Vec<S>,
}

impl<S: State> Solution<S> {
    /// Cubic Hermite interpolation between the bracketing samples.
    pub fn interpolate(&self, t: f64) -> S {
        let m = self.times.len();
        if m == 1 || t <= self.times[0] {
            return self.states[0].clone();
        }
        if t >= self.times[m - 1] {
            return self.states[m - 1].clone();
        }
        let hi = self.times.partition_point(|&x| x <= t).min(m - 1);
        let lo = hi - 1;
        let (t0, t1) = (self.times[lo], self.times[hi]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        self.states[lo].combine(&[
            (h00 - 1.0, &self.states[lo]),
            (h10 * h, &self.derivatives[lo]),
            (h01, &self.states[hi]),
            (h11 * h, &self.derivatives[hi]),
        ])
    }
}

// Dormand–Prince 5(4) tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const UNDERFLOW: f64 = 1e-13;

/// Integrates `ẏ = f(t, y)` from `t0` to `t1`, landing exactly on each time in `stops`.
pub fn solve<S, F>(f: F, t0: f64, t1: f64, y0: S, cfg: &IntegratorConfig, stops: &[f64]) -> Result<Solution<S>>
where
    S: State,
    F: Fn(f64, &S) -> Result<S>,
{
    cfg.validate()?;
    if t1.is_nan() || t0.is_nan() || t1 <= t0 {
        return Err(Error::InvalidConfig(format!("need t1 > t0, got [{t0}, {t1}]")));
    }
    let mut stops: Vec<f64> = stops.iter().copied().filter(|&s| s > t0 && s < t1).collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    stops.push(t1);

    let f0 = f(t0, &y0)?;
    let mut sol = Solution { times: vec![t0], states: vec![y0], derivatives: vec![f0] };
    match cfg.method {
        Method::Dp54Adaptive => dp54(&f, t0, t1, cfg, &stops, &mut sol)?,
        Method::Rk4Fixed { step } => rk4(&f, t0, step.min(cfg.max_step), &stops, &mut sol)?,
    }
    Ok(sol)
}

fn dp54<S, F>(f: &F, t0: f64, t1: f64, cfg: &IntegratorConfig, stops: &[f64], sol: &mut Solution<S>) -> Result<()>
where
    S: State,
    F: Fn(f64, &S) -> Result<S>,
{
    let span = t1 - t0;
    let min_step = UNDERFLOW * span;
    let mut t = t0;
    let mut y = sol.states[0].clone();
    let mut fy = sol.derivatives[0].clone();
    let mut h = initial_step(&y, &fy, cfg).min(span).min(cfg.max_step);
    let mut next_stop = 0;

    while next_stop < stops.len() {
        let target = stops[next_stop];
        let remaining = target - t;
        let landing = h >= remaining * (1.0 - 1e-12);
        let step = if landing { remaining } else { h };
        if step < min_step && !landing {
            return Err(Error::StepUnderflow { t, h: step });
        }

        let mut k: Vec<S> = Vec::with_capacity(7);
        k.push(fy.clone());
        for s in 1..7 {
            let terms: Vec<(f64, &S)> = (0..s).map(|j| (step * A[s][j], &k[j])).collect();
            let ys = y.combine(&terms);
            k.push(f(t + C[s] * step, &ys)?);
        }
        // the last stage is evaluated at the fifth-order solution
        let terms: Vec<(f64, &S)> = (0..6).map(|j| (step * A[6][j], &k[j])).collect();
        let y_new = y.combine(&terms);
        let err_terms: Vec<(f64, &S)> = (0..7).map(|j| (step * E[j], &k[j])).collect();
        let err_vec = k[0].combine(&[(-1.0, &k[0])]).combine(&err_terms);
        let err = err_vec.error_ratio(&y, &y_new, cfg.abs_tol, cfg.rel_tol);

        if !err.is_finite() || !y_new.all_finite() {
            if step <= min_step {
                return Err(Error::NonFinite { t });
            }
            h = step * MIN_FACTOR;
            continue;
        }
        if err <= 1.0 {
            t = if landing { target } else { t + step };
            y = y_new;
            fy = k.pop().expect("seven stages");
            sol.times.push(t);
            sol.states.push(y.clone());
            sol.derivatives.push(fy.clone());
            if landing {
                next_stop += 1;
            }
            let factor = if err == 0.0 { MAX_FACTOR } else { (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR) };
            // a short landing step says nothing about the natural step size
            h = if landing { h.max(step * factor) } else { step * factor };
        } else {
            h = step * (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
            if h < min_step {
                return Err(Error::StepUnderflow { t, h });
            }
        }
        h = h.min(cfg.max_step);
    }
    Ok(())
}

fn initial_step<S: State>(y: &S, fy: &S, cfg: &IntegratorConfig) -> f64 {
    let d0 = y.magnitude().max(1e-5);
    let d1 = fy.magnitude().max(1e-5);
    let tol = cfg.rel_tol.max(cfg.abs_tol);
    (d0 / d1) * tol.powf(0.2)
}

fn rk4<S, F>(f: &F, t0: f64, step: f64, stops: &[f64], sol: &mut Solution<S>) -> Result<()>
where
    S: State,
    F: Fn(f64, &S) -> Result<S>,
{
    let mut t = t0;
    let mut y = sol.states[0].clone();
    for &stop in stops {
        let count = ((stop - t) / step).ceil().max(1.0) as usize;
        let h = (stop - t) / count as f64;
        let base = t;
        for m in 0..count {
            let tm = base + m as f64 * h;
            let k1 = f(tm, &y)?;
            let k2 = f(tm + h / 2.0, &y.combine(&[(h / 2.0, &k1)]))?;
            let k3 = f(tm + h / 2.0, &y.combine(&[(h / 2.0, &k2)]))?;
            let k4 = f(tm + h, &y.combine(&[(h, &k3)]))?;
            y = y.combine(&[(h / 6.0, &k1), (h / 3.0, &k2), (h / 3.0, &k3), (h / 6.0, &k4)]);
            if !y.all_finite() {
                return Err(Error::NonFinite { t: tm + h });
            }
            t = if m + 1 == count { stop } else { base + (m + 1) as f64 * h };
            sol.times.push(t);
            sol.derivatives.push(f(t, &y)?);
            sol.states.push(y.clone());
        }
    }
    Ok(())
}

/// Fundamental-matrix samples of `Ṁ = A(t)·M`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    solution: Solution<QMatrix>,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.solution.times
    }

    pub fn states(&self) -> &[QMatrix] {
        &self.solution.states
    }

    pub fn initial(&self) -> &QMatrix {
        &self.solution.states[0]
    }

    pub fn final_time(&self) -> f64 {
        *self.solution.times.last().expect("nonempty trajectory")
    }

    pub fn final_state(&self) -> &QMatrix {
        self.solution.states.last().expect("nonempty trajectory")
    }

    /// The sample at exactly time `t`, if the integrator stopped there.
    pub fn sample_at(&self, t: f64) -> Option<&QMatrix> {
        let idx = self.solution.times.iter().position(|&s| s == t)?;
        Some(&self.solution.states[idx])
    }

    /// Dense output by cubic Hermite interpolation.
    pub fn at(&self, t: f64) -> QMatrix {
        self.solution.interpolate(t)
    }

    pub fn len(&self) -> usize {
        self.solution.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solution.times.is_empty()
    }
}

/// Integrates `Ṁ = A(t)·M`, `M(t0) = m0`, over `[t0, t1]`.
pub fn integrate(spec: &MatrixSpec, t0: f64, t1: f64, m0: &QMatrix, cfg: &IntegratorConfig) -> Result<Trajectory> {
    integrate_with_stops(spec, t0, t1, m0, cfg, &[])
}

/// As [`integrate`], also stopping exactly at each requested time in `(t0, t1)`.
pub fn integrate_with_stops(
    spec: &MatrixSpec,
    t0: f64,
    t1: f64,
    m0: &QMatrix,
    cfg: &IntegratorConfig,
    stops: &[f64],
) -> Result<Trajectory> {
    if m0.rows() != spec.n() || m0.cols() != spec.n() {
        return Err(Error::DimensionMismatch {
            expected: format!("{0}x{0} initial matrix", spec.n()),
            found: format!("{}x{}", m0.rows(), m0.cols()),
        });
    }
    let field = |t: f64, m: &QMatrix| -> Result<QMatrix> { Ok(&spec.eval(t)? * m) };
    let solution = solve(field, t0, t1, m0.clone(), cfg, stops)?;
    Ok(Trajectory { solution })
}

/// `∫_{t0}^{tₖ} Re tr A` at each requested time, integrated as a scalar ODE.
pub fn re_trace_integral(spec: &MatrixSpec, t0: f64, times: &[f64]) -> Result<Vec<f64>> {
    let t1 = times.iter().copied().fold(t0, f64::max);
    if t1 <= t0 {
        return Ok(vec![0.0; times.len()]);
    }
    let cfg = IntegratorConfig::with_tolerances(1e-12, 1e-14);
    let sol = solve(|t, _: &f64| spec.re_trace(t), t0, t1, 0.0, &cfg, times)?;
    Ok(times
        .iter()
        .map(|&t| {
            sol.times.iter().position(|&s| s == t).map_or_else(|| sol.interpolate(t), |i| sol.states[i])
        })
        .collect())
}

/// `max |qdet M(t) − exp(2∫Re tr A)·qdet M(t0)| / max(1, qdet M(t0))` over the samples.
pub fn liouville_residual(traj: &Trajectory, spec: &MatrixSpec) -> Result<f64> {
    let t0 = traj.times()[0];
    let d0 = traj.initial().qdet()?;
    let integrals = re_trace_integral(spec, t0, traj.times())?;
    let mut worst = 0.0f64;
    for (m, s) in traj.states().iter().zip(integrals) {
        let predicted = (2.0 * s).exp() * d0;
        worst = worst.max((m.qdet()? - predicted).abs());
    }
    Ok(worst / d0.max(1.0))
}
