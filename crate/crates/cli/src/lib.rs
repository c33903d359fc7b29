//! Command-line front end for `qfloquet`.
//!
//! A run is described by an [`AnalysisConfig`], built from flags or read from a
//! JSON file. JSON reports embed their config, so `--replay` can rerun them.

pub mod analysis;
pub mod config;
pub mod error;
pub mod render;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

pub use analysis::{run as analyze, Report};
pub use config::{AnalysisConfig, Format, Mode};
pub use error::{CliError, Result};

/// Relative tolerance for numbers when replaying a report.
pub const REPLAY_TOL: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "qfloquet", version, about = "Floquet analysis of quaternion-valued linear systems")]
pub struct Cli {
    /// Run the analysis described by a JSON config file.
    #[arg(long, conflicts_with = "replay")]
    pub config: Option<PathBuf>,

    /// Rerun the config embedded in a JSON report and check the results match.
    #[arg(long)]
    pub replay: Option<PathBuf>,

    #[command(flatten)]
    pub common: CommonArgs,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Relative tolerance of the adaptive integrator.
    #[arg(long, global = true, value_parser = parse_real_arg, allow_hyphen_values = true)]
    pub rtol: Option<f64>,
    /// Absolute tolerance of the adaptive integrator.
    #[arg(long, global = true, value_parser = parse_real_arg, allow_hyphen_values = true)]
    pub atol: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the report to a file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Constant system x' = A x.
    Constant {
        /// Matrix entries row by row; separate rows with a ";" token. Must come last.
        #[arg(long, num_args = 1.., required = true, allow_hyphen_values = true)]
        entry: Vec<String>,
    },
    /// Periodic system x' = A(t) x.
    Periodic {
        #[arg(long, value_parser = parse_real_arg)]
        period: f64,
        /// Matrix entries row by row; separate rows with a ";" token. Must come last.
        #[arg(long, num_args = 1.., required = true, allow_hyphen_values = true)]
        entry: Vec<String>,
    },
    /// Hill equation x'' + a(t) x = 0.
    Hill {
        #[arg(long, value_parser = parse_real_arg)]
        period: f64,
        /// The coefficient a(t).
        #[arg(long, allow_hyphen_values = true)]
        a: String,
    },
    /// Hill analysis over a grid of one scalar parameter.
    Sweep {
        #[arg(long, value_parser = parse_real_arg)]
        period: f64,
        /// The coefficient a(t), referencing the parameter.
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, default_value = "p")]
        param: String,
        /// Explicit grid values, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_real_arg, conflicts_with_all = ["from", "to", "step"])]
        values: Vec<f64>,
        #[arg(long, value_parser = parse_real_arg, allow_hyphen_values = true, requires_all = ["to", "step"])]
        from: Option<f64>,
        #[arg(long, value_parser = parse_real_arg, allow_hyphen_values = true, requires_all = ["from", "step"])]
        to: Option<f64>,
        #[arg(long, value_parser = parse_real_arg, allow_hyphen_values = true, requires_all = ["from", "to"])]
        step: Option<f64>,
    },
}

fn parse_real_arg(s: &str) -> std::result::Result<f64, String> {
    config::parse_real(s).map_err(|e| e.to_string())
}

/// Output of one invocation: the rendered report and where it goes.
#[derive(Debug)]
pub struct Output {
    pub text: String,
    pub path: Option<PathBuf>,
}

impl Cli {
    /// Builds the config for a flag- or file-driven run.
    pub fn analysis_config(&self) -> Result<AnalysisConfig> {
        let mut cfg = match (&self.config, &self.command) {
            (Some(_), Some(_)) => return Err(CliError::Usage("--config cannot be combined with a subcommand".into())),
            (Some(path), None) => read_json::<AnalysisConfig>(path)?,
            (None, Some(cmd)) => from_command(cmd)?,
            (None, None) => return Err(CliError::Usage("expected a subcommand, --config or --replay".into())),
        };
        apply_common(&mut cfg, &self.common);
        Ok(cfg)
    }
}

/// `--entry` takes every remaining token, so a flag after it would be read as an entry.
fn entry_rows(tokens: &[String]) -> Result<Vec<Vec<String>>> {
    if let Some(flag) = tokens.iter().find(|t| t.starts_with("--")) {
        return Err(CliError::Usage(format!("`{flag}` was read as a matrix entry; place --entry after all other flags")));
    }
    Ok(config::split_rows(tokens))
}

fn from_command(cmd: &Command) -> Result<AnalysisConfig> {
    Ok(match cmd {
        Command::Constant { entry } => AnalysisConfig { entries: Some(entry_rows(entry)?), ..AnalysisConfig::new(Mode::Constant) },
        Command::Periodic { period, entry } => AnalysisConfig {
            period: Some(*period),
            entries: Some(entry_rows(entry)?),
            ..AnalysisConfig::new(Mode::Periodic)
        },
        Command::Hill { period, a } => AnalysisConfig { period: Some(*period), a: Some(a.clone()), ..AnalysisConfig::new(Mode::Hill) },
        Command::Sweep { period, a, param, values, from, to, step } => AnalysisConfig {
            period: Some(*period),
            a: Some(a.clone()),
            sweep: Some(config::SweepGrid {
                param: param.clone(),
                values: values.clone(),
                start: *from,
                stop: *to,
                step: *step,
                jobs: None,
            }),
            ..AnalysisConfig::new(Mode::Sweep)
        },
    })
}

fn apply_common(cfg: &mut AnalysisConfig, common: &CommonArgs) {
    if common.rtol.is_some() {
        cfg.integrator.rtol = common.rtol;
    }
    if common.atol.is_some() {
        cfg.integrator.atol = common.atol;
    }
    if common.format.is_some() {
        cfg.output.format = common.format;
    }
    if common.out.is_some() {
        cfg.output.path = common.out.clone();
    }
    if let (Some(jobs), Some(grid)) = (common.jobs, cfg.sweep.as_mut()) {
        grid.jobs = Some(jobs);
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.to_path_buf(), source })
}

pub fn execute(cli: &Cli) -> Result<Output> {
    if cli.common.jobs == Some(0) {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    if let Some(path) = &cli.replay {
        return replay(path, &cli.common);
    }
    let cfg = cli.analysis_config()?;
    let report = analyze(&cfg)?;
    Ok(Output { text: render::render(&report, cfg.format())?, path: cfg.output.path.clone() })
}

/// Reruns a stored report; its own output path is ignored so the original is not overwritten.
fn replay(path: &Path, common: &CommonArgs) -> Result<Output> {
    let stored: Value = read_json(path)?;
    let config = stored
        .get("config")
        .cloned()
        .ok_or_else(|| CliError::Usage(format!("{}: report has no config", path.display())))?;
    let mut cfg: AnalysisConfig = serde_json::from_value(config).map_err(|source| CliError::Json { path: path.to_path_buf(), source })?;
    let report = analyze(&cfg)?;
    let fresh = serde_json::to_value(&report).map_err(|e| CliError::Usage(format!("json: {e}")))?;
    if let Some(at) = first_difference(&stored["result"], &fresh["result"], "result") {
        return Err(CliError::ReplayMismatch(at));
    }
    cfg.output = Default::default();
    cfg.output.format = Some(common.format.unwrap_or(Format::Json));
    cfg.output.path = common.out.clone();
    let report = Report { config: cfg.clone(), ..report };
    Ok(Output { text: render::render(&report, cfg.format())?, path: cfg.output.path })
}

/// Path of the first value that differs, comparing numbers to [`REPLAY_TOL`] relative.
pub fn first_difference(a: &Value, b: &Value, at: &str) -> Option<String> {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64()?, y.as_f64()?);
            let close = x == y || (x - y).abs() <= REPLAY_TOL * x.abs().max(y.abs()).max(1.0);
            (!close).then(|| format!("{at} ({x} vs {y})"))
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                return Some(format!("{at} (length {} vs {})", x.len(), y.len()));
            }
            x.iter().zip(y).enumerate().find_map(|(k, (x, y))| first_difference(x, y, &format!("{at}[{k}]")))
        }
        (Value::Object(x), Value::Object(y)) => {
            if x.len() != y.len() || x.keys().any(|k| !y.contains_key(k)) {
                return Some(format!("{at} (keys differ)"));
            }
            x.iter().find_map(|(k, v)| first_difference(v, &y[k], &format!("{at}.{k}")))
        }
        _ => (a != b).then(|| format!("{at} ({a} vs {b})")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn differences_are_located() {
        let a = json!({"x": [1.0, 2.0], "v": "stable"});
        assert_eq!(first_difference(&a, &a, "r"), None);
        assert_eq!(first_difference(&a, &json!({"x": [1.0, 2.0 + 1e-14], "v": "stable"}), "r"), None);
        assert!(first_difference(&a, &json!({"x": [1.0, 2.1], "v": "stable"}), "r").unwrap().starts_with("r.x[1]"));
        assert!(first_difference(&a, &json!({"x": [1.0, 2.0], "v": "unstable"}), "r").unwrap().starts_with("r.v"));
        assert!(first_difference(&a, &json!({"x": [1.0], "v": "stable"}), "r").is_some());
    }

    #[test]
    fn entry_tokens_become_rows() {
        let cli = Cli::try_parse_from(["qfloquet", "periodic", "--period", "pi", "--entry", "1", "1", ";", "0", "-k"]).unwrap();
        let cfg = cli.analysis_config().unwrap();
        assert_eq!(cfg.period, Some(std::f64::consts::PI));
        assert_eq!(cfg.entries.unwrap(), vec![vec!["1", "1"], vec!["0", "-k"]]);
    }

    #[test]
    fn entries_come_last() {
        let cli = Cli::try_parse_from(["qfloquet", "constant", "--format", "json", "--entry", "-1"]).unwrap();
        let cfg = cli.analysis_config().unwrap();
        assert_eq!(cfg.entries.unwrap(), vec![vec!["-1"]]);
        assert_eq!(cfg.output.format, Some(Format::Json));
        let late = Cli::try_parse_from(["qfloquet", "constant", "--entry", "-1", "--format", "json"]).unwrap();
        let err = late.analysis_config().unwrap_err();
        assert!(err.to_string().contains("--format"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn common_flags_override_config() {
        let cli = Cli::try_parse_from(["qfloquet", "--rtol", "1e-9", "hill", "--period", "2*pi", "--a", "1"]).unwrap();
        let cfg = cli.analysis_config().unwrap();
        assert_eq!(cfg.integrator.rtol, Some(1e-9));
        assert_eq!(cfg.period, Some(2.0 * std::f64::consts::PI));
    }
}
