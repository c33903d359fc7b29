//! `n × n` coefficient matrices `A(t)` built from expressions.

use crate::error::{Error, Result};
use crate::expr::{self, Expr};
use crate::matrix::QMatrix;
use crate::quaternion::Quaternion;

/// Grid resolution for the periodicity test.
pub const PERIODICITY_GRID: usize = 64;
/// Absolute tolerance for `‖A(t) − A(t + T)‖` on that grid.
pub const PERIODICITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSpec {
    n: usize,
    entries: Vec<Expr>,
    /// `None` for a constant system.
    period: Option<f64>,
}

impl MatrixSpec {
    pub fn new(n: usize, entries: Vec<Expr>, period: Option<f64>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: format!("{n}x{n} entries"),
                found: format!("{}", entries.len()),
            });
        }
        if let Some(p) = period {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::InvalidConfig(format!("period must be positive, got {p}")));
            }
        }
        Ok(Self { n, entries, period })
    }

    /// Parses a square grid of expression strings.
    pub fn parse<S: AsRef<str>>(rows: &[Vec<S>], period: Option<f64>) -> Result<Self> {
        Self::parse_with_params(rows, period, &[])
    }

    pub fn parse_with_params<S: AsRef<str>>(
        rows: &[Vec<S>],
        period: Option<f64>,
        params: &[&str],
    ) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: format!("{n} entries in row {}", r + 1),
                    found: row.len().to_string(),
                });
            }
            for src in row {
                entries.push(expr::parse_with_params(src.as_ref(), params)?);
            }
        }
        Self::new(n, entries, period)
    }

    /// A spec whose entries are the constant values of `a`.
    pub fn constant(a: &QMatrix, period: Option<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NonSquare { rows: a.rows(), cols: a.cols() });
        }
        let entries = a.entries().iter().map(|q| quaternion_expr(*q)).collect();
        Self::new(a.rows(), entries, period)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> Option<f64> {
        self.period
    }

    pub fn with_period(mut self, period: Option<f64>) -> Result<Self> {
        self.period = period;
        Self::new(self.n, self.entries, self.period)
    }

    pub fn entry(&self, r: usize, c: usize) -> &Expr {
        &self.entries[r * self.n + c]
    }

    pub fn entries(&self) -> &[Expr] {
        &self.entries
    }

    pub fn depends_on_time(&self) -> bool {
        self.entries.iter().any(Expr::depends_on_time)
    }

    pub fn bind(&self, name: &str, value: f64) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|e| e.bind(name, value)).collect(),
            period: self.period,
        }
    }

    /// `A(t)`.
    pub fn eval(&self, t: f64) -> Result<QMatrix> {
        let values = self.entries.iter().map(|e| e.eval(t)).collect::<Result<Vec<_>>>()?;
        QMatrix::from_row_major(self.n, self.n, values)
    }

    /// `Re tr A(t)`.
    pub fn re_trace(&self, t: f64) -> Result<f64> {
        (0..self.n).map(|i| self.entry(i, i).eval(t).map(|q| q.re())).sum()
    }

    /// `max ‖A(t_k) − A(t_k + T)‖` over an evenly spaced grid on `[0, T)`.
    pub fn periodicity_residual(&self) -> Result<f64> {
        let period = self.period.ok_or(Error::MissingPeriod)?;
        let mut worst = 0.0f64;
        for k in 0..PERIODICITY_GRID {
            let t = period * k as f64 / PERIODICITY_GRID as f64;
            let d = (&self.eval(t)? - &self.eval(t + period)?).sum_norm();
            worst = worst.max(d);
        }
        Ok(worst)
    }

    /// Fails with `NotPeriodic` unless the grid residual is within tolerance.
    pub fn check_periodic(&self) -> Result<f64> {
        let period = self.period.ok_or(Error::MissingPeriod)?;
        let residual = self.periodicity_residual()?;
        if residual > PERIODICITY_TOL {
            return Err(Error::NotPeriodic { period, residual });
        }
        Ok(period)
    }
}

fn quaternion_expr(q: Quaternion) -> Expr {
    use crate::expr::Unit;
    let term = |c: f64, u: Unit| Expr::Mul(Box::new(Expr::Num(c)), Box::new(Expr::Unit(u)));
    let sum = |a: Expr, b: Expr| Expr::Add(Box::new(a), Box::new(b));
    sum(sum(sum(Expr::Num(q.q0), term(q.q1, Unit::I)), term(q.q2, Unit::J)), term(q.q3, Unit::K))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn example_five_coefficients() {
        let spec = MatrixSpec::parse(&[vec!["1", "1"], vec!["0", "i + 2*exp(2*i*t)*j"]], Some(PI)).unwrap();
        let a0 = spec.eval(0.0).unwrap();
        assert_eq!(a0[(1, 1)], Quaternion::new(0.0, 1.0, 2.0, 0.0));
        assert_eq!(spec.re_trace(0.3).unwrap(), 1.0);
        assert!(spec.check_periodic().unwrap() == PI);
        assert!(spec.depends_on_time());
    }

    #[test]
    fn non_periodic_is_rejected() {
        let spec = MatrixSpec::parse(&[vec!["exp(i*t)"]], Some(1.0)).unwrap();
        assert!(matches!(spec.check_periodic(), Err(Error::NotPeriodic { .. })));
        let spec = MatrixSpec::parse(&[vec!["t"]], None).unwrap();
        assert!(matches!(spec.check_periodic(), Err(Error::MissingPeriod)));
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(
            MatrixSpec::parse(&[vec!["1", "2"], vec!["3"]], None),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(MatrixSpec::parse(&[vec!["1"]], Some(-1.0)), Err(Error::InvalidConfig(_))));
        assert!(matches!(MatrixSpec::parse(&[vec!["1 +"]], None), Err(Error::Syntax { .. })));
    }

    #[test]
    fn constant_spec_reproduces_matrix() {
        let a = QMatrix::from_rows(vec![
            vec![Quaternion::new(-1.0, 1.0, 0.0, -1.0), Quaternion::new(0.0, -1.0, 0.0, 0.0)],
            vec![Quaternion::new(1.0, 1.0, -1.0, 1.0), Quaternion::new(-2.0, 0.0, 0.0, -1.0)],
        ])
        .unwrap();
        let spec = MatrixSpec::constant(&a, None).unwrap();
        assert_eq!(spec.eval(7.0).unwrap(), a);
        assert!(!spec.depends_on_time());
    }

    #[test]
    fn parameter_binding() {
        let spec = MatrixSpec::parse_with_params(&[vec!["p + t"]], Some(1.0), &["p"]).unwrap();
        assert!(matches!(spec.eval(0.0), Err(Error::UnboundParameter(_))));
        assert_eq!(spec.bind("p", 2.0).eval(1.0).unwrap()[(0, 0)], Quaternion::real(3.0));
    }
}
