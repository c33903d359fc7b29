use std::path::PathBuf;

use qfloquet::{IntegratorConfig, Method};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{CliError, Result};

const PI_LITERAL: &str = "(3.141592653589793)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Constant,
    Periodic,
    Hill,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rtol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

/// Parameter grid for a sweep: explicit values, or `start..=stop` by `step`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    #[serde(default = "default_param")]
    pub param: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<f64>,
    #[serde(default, deserialize_with = "opt_real", skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, deserialize_with = "opt_real", skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, deserialize_with = "opt_real", skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
}

fn default_param() -> String {
    "p".to_string()
}

impl SweepGrid {
    pub fn points(&self) -> Result<Vec<f64>> {
        let range = (self.start, self.stop, self.step);
        match (self.values.is_empty(), range) {
            (false, (None, None, None)) => Ok(self.values.clone()),
            (true, (Some(start), Some(stop), Some(step))) => {
                if step.is_nan() || step <= 0.0 || !start.is_finite() || !stop.is_finite() {
                    return Err(CliError::Usage(format!("sweep step must be positive and bounds finite (step = {step})")));
                }
                let count = ((stop - start) / step + 1e-9).floor();
                if count < 0.0 {
                    return Ok(Vec::new());
                }
                Ok((0..=count as usize).map(|k| start + k as f64 * step).collect())
            }
            (true, (None, None, None)) => Ok(Vec::new()),
            _ => Err(CliError::Usage("sweep needs either values or all of start, stop and step".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub mode: Mode,
    #[serde(default, deserialize_with = "opt_real", skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<String>,
    #[serde(default)]
    pub integrator: IntegratorOverrides,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepGrid>,
}

impl AnalysisConfig {
    pub fn new(mode: Mode) -> Self {
        AnalysisConfig {
            mode,
            period: None,
            entries: None,
            a: None,
            integrator: IntegratorOverrides::default(),
            output: OutputConfig::default(),
            sweep: None,
        }
    }

    pub fn integrator_config(&self) -> Result<IntegratorConfig> {
        let mut cfg = IntegratorConfig::default();
        if let Some(r) = self.integrator.rtol {
            cfg.rel_tol = r;
        }
        if let Some(a) = self.integrator.atol {
            cfg.abs_tol = a;
        }
        if let Some(m) = self.integrator.method {
            cfg.method = m;
        }
        cfg.validate().map_err(|e| CliError::from_core("integrator", e))?;
        Ok(cfg)
    }

    pub fn require_period(&self) -> Result<f64> {
        match self.period {
            Some(t) if t > 0.0 && t.is_finite() => Ok(t),
            Some(t) => Err(CliError::Usage(format!("period must be positive and finite, got {t}"))),
            None => Err(CliError::Usage(format!("{:?} mode requires a period", self.mode).to_lowercase())),
        }
    }

    pub fn require_entries(&self) -> Result<&[Vec<String>]> {
        match &self.entries {
            Some(rows) if !rows.is_empty() => Ok(rows),
            _ => Err(CliError::Usage("matrix entries are required".into())),
        }
    }

    pub fn require_coefficient(&self) -> Result<&str> {
        self.a.as_deref().ok_or_else(|| CliError::Usage("coefficient a(t) is required".into()))
    }

    pub fn format(&self) -> Format {
        self.output.format.unwrap_or(match self.mode {
            Mode::Sweep => Format::Csv,
            _ => Format::Text,
        })
    }
}

/// Parses a real scalar such as `2`, `pi`, `2*pi` or `pi/2`.
pub fn parse_real(src: &str) -> Result<f64> {
    let normalized = src.replace("pi", PI_LITERAL);
    let expr = qfloquet::parse(&normalized).map_err(|e| CliError::Usage(format!("`{src}`: {e}")))?;
    if expr.depends_on_time() {
        return Err(CliError::Usage(format!("`{src}` must not depend on t")));
    }
    let q = expr.eval(0.0).map_err(|e| CliError::Usage(format!("`{src}`: {e}")))?;
    if !q.is_real(0.0) || !q.q0.is_finite() {
        return Err(CliError::Usage(format!("`{src}` is not a finite real number")));
    }
    Ok(q.q0)
}

fn opt_real<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Real {
        Number(f64),
        Text(String),
    }
    match Option::<Real>::deserialize(d)? {
        None => Ok(None),
        Some(Real::Number(x)) => Ok(Some(x)),
        Some(Real::Text(s)) => parse_real(&s).map(Some).map_err(serde::de::Error::custom),
    }
}

/// Splits entry tokens into rows at `;` tokens.
pub fn split_rows(tokens: &[String]) -> Vec<Vec<String>> {
    tokens
        .split(|t| t.trim() == ";")
        .filter(|row| !row.is_empty())
        .map(|row| row.to_vec())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn reals_with_pi() {
        assert_eq!(parse_real("pi").unwrap(), PI);
        assert_eq!(parse_real("2*pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_real("pi/2").unwrap(), PI / 2.0);
        assert_eq!(parse_real("-1.5").unwrap(), -1.5);
        assert!(parse_real("i").is_err());
        assert!(parse_real("t").is_err());
        assert!(parse_real("2 +").is_err());
    }

    #[test]
    fn rows_split_at_semicolons() {
        let tokens: Vec<String> = ["1", "1", ";", "0", "k"].iter().map(|s| s.to_string()).collect();
        assert_eq!(split_rows(&tokens), vec![vec!["1", "1"], vec!["0", "k"]]);
        assert_eq!(split_rows(&tokens[..2]), vec![vec!["1", "1"]]);
    }

    #[test]
    fn grid_points() {
        let mut g = SweepGrid { param: "p".into(), values: vec![], start: Some(-1.0), stop: Some(2.0), step: Some(1.0), jobs: None };
        assert_eq!(g.points().unwrap(), vec![-1.0, 0.0, 1.0, 2.0]);
        g.stop = Some(-2.0);
        assert!(g.points().unwrap().is_empty());
        g.step = Some(0.0);
        assert!(g.points().is_err());
        let explicit = SweepGrid { param: "p".into(), values: vec![0.5], start: None, stop: None, step: None, jobs: None };
        assert_eq!(explicit.points().unwrap(), vec![0.5]);
    }

    #[test]
    fn config_json_accepts_pi_and_rejects_unknown_keys() {
        let cfg: AnalysisConfig =
            serde_json::from_str(r#"{"mode": "hill", "period": "pi", "a": "1", "integrator": {"rtol": 1e-9}}"#).unwrap();
        assert_eq!(cfg.period, Some(PI));
        assert_eq!(cfg.integrator_config().unwrap().rel_tol, 1e-9);
        assert!(serde_json::from_str::<AnalysisConfig>(r#"{"mode": "hill", "colour": 1}"#).is_err());
        let back: AnalysisConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }
}
