use std::fmt::Write as _;

use qfloquet::floquet::NormBehavior;
use qfloquet::{ComplexPair, QMatrix, Quaternion, StabilityKind, StabilityVerdict, StandardSpectrum};

use crate::analysis::{Analysis, ConstantReport, HillOutput, PeriodicReport, Report, Samples, SweepRow};
use crate::config::Format;
use crate::error::{CliError, Result};

pub fn render(report: &Report, format: Format) -> Result<String> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).map_err(|e| CliError::Usage(format!("json: {e}")))?;
            s.push('\n');
            Ok(s)
        }
        Format::Text => Ok(text(report)),
        Format::Csv => csv(report),
    }
}

fn text(report: &Report) -> String {
    match &report.result {
        Analysis::Constant(r) => constant_text(r),
        Analysis::Periodic(r) => periodic_text(r),
        Analysis::Hill(r) => hill_text(r),
        Analysis::Sweep(rows) => sweep_text(rows),
    }
}

/// Shortest round-trip decimal, switching to exponent form for very small or large values.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

fn signed(x: f64) -> String {
    if x.is_sign_negative() {
        format!("-{}", num(-x))
    } else {
        format!("+{}", num(x))
    }
}

pub fn complex(z: ComplexPair) -> String {
    format!("{}{}i", num(z.re), signed(z.im))
}

pub fn quaternion(q: Quaternion) -> String {
    format!("{}{}i{}j{}k", num(q.q0), signed(q.q1), signed(q.q2), signed(q.q3))
}

fn behavior_label(b: NormBehavior) -> &'static str {
    match b {
        NormBehavior::Unbounded => "lim ||M(t)|| = inf",
        NormBehavior::DecaysToZero => "lim ||M(t)|| = 0",
        NormBehavior::Bounded => "||M(t)|| bounded, not -> 0",
    }
}

/// One line per distinct value: `sym_j = z` plus extra columns from `detail`.
fn spectrum_lines(s: &StandardSpectrum, sym: &str, detail: impl Fn(usize, ComplexPair) -> String) -> Vec<String> {
    s.entries
        .iter()
        .enumerate()
        .map(|(j, e)| format!("{sym}{} = {}, {} (am {}, gm {})", j + 1, complex(e.value), detail(j + 1, e.value), e.algebraic, e.geometric))
        .collect()
}

fn verdict_lines(v: &StabilityVerdict) -> String {
    let mut s = String::new();
    for e in &v.evidence {
        let value = e.value.map(|z| format!(" [{}]", complex(z))).unwrap_or_default();
        let _ = writeln!(s, "  {}{value}: {} vs {} (margin {})", e.quantity, num(e.measured), num(e.threshold), num(e.margin));
    }
    s
}

fn matrix_lines(m: &QMatrix) -> String {
    m.to_rows()
        .iter()
        .map(|row| format!("  [{}]\n", row.iter().map(|q| quaternion(*q)).collect::<Vec<_>>().join(", ")))
        .collect()
}

fn constant_text(r: &ConstantReport) -> String {
    let mut s = format!("Constant system, n = {}\n", r.matrix.rows());
    let spectrum = spectrum_lines(&r.eigenvalues, "λ", |j, z| format!("Re(λ{j}) = {}", num(z.re)));
    s += &table(
        &["Fundamental matrix", "Standard eigenvalues of A", "Stability"],
        &[vec![vec![behavior_label(r.fundamental).to_string()], spectrum, vec![r.verdict.kind.to_string()]]],
    );
    s += "Evidence:\n";
    s += &verdict_lines(&r.verdict);
    s
}

fn periodic_text(r: &PeriodicReport) -> String {
    let mut s = format!("Periodic system, n = {}, T = {}\n", r.monodromy.rows(), num(r.period));
    let multipliers = spectrum_lines(&r.multipliers, "ρ", |j, z| format!("|ρ{j}| = {}", num(z.abs())));
    s += &table(
        &["Fundamental matrix", "Characteristic multipliers", "Stability"],
        &[vec![vec![behavior_label(r.fundamental).to_string()], multipliers, vec![r.verdict.kind.to_string()]]],
    );
    s += "Monodromy matrix M(T):\n";
    s += &matrix_lines(&r.monodromy);
    s += "Characteristic exponents:\n";
    for (j, mu) in r.exponents.iter().enumerate() {
        let _ = writeln!(s, "  μ{} = {}", j + 1, complex(*mu));
    }
    s += "B with M(t) = P(t) e^{tB}:\n";
    s += &matrix_lines(&r.b);
    let _ = writeln!(s, "  log branch: {:?}, residual {}", r.log_branch, num(r.log_residual));
    s += "Spectrum of B:\n";
    for line in spectrum_lines(&r.b_spectrum, "β", |j, z| format!("Re(β{j}) = {}", num(z.re))) {
        let _ = writeln!(s, "  {line}");
    }
    let _ = writeln!(s, "P(t + T) - P(t) residual: {} (tolerance {})", num(r.periodicity_residual), num(r.periodicity_tolerance));
    let pc = &r.product_check;
    let _ = writeln!(
        s,
        "Multiplier product: int Re tr A = {}, product residual {}, exponent residual {}",
        num(pc.trace_integral),
        num(pc.product_residual),
        num(pc.exponent_residual)
    );
    if !r.periodic_solutions.is_empty() {
        s += "Periodic solutions:\n";
        for p in &r.periodic_solutions {
            let _ = writeln!(s, "  {:?} for ρ = {}, residual {}", p.kind, complex(p.multiplier), num(p.residual));
        }
    }
    s += "Evidence:\n";
    s += &verdict_lines(&r.verdict);
    s
}

fn hill_text(h: &HillOutput) -> String {
    let r = &h.report;
    let mut s = format!("Hill equation x'' + a(t) x = 0, a(t) = {}, T = {}\n", h.coefficient, num(h.period));
    let multipliers = spectrum_lines(&r.multipliers, "ρ", |j, z| format!("|ρ{j}| = {}", num(z.abs())));
    let mut verdicts = vec![
        format!("trace: {}", r.verdict_trace.kind),
        format!("Frobenius: {}", r.verdict_frobenius.kind),
        format!("multipliers: {}", r.verdict_multipliers.kind),
    ];
    if let Some(v) = &h.verdict_real {
        verdicts.push(format!("real table: {}", v.kind));
    }
    s += &table(
        &["Re tr M(T)", "||M(T)||_F^2", "Characteristic multipliers", "Stability"],
        &[vec![vec![num(r.re_trace)], vec![num(r.frob_sq)], multipliers, verdicts]],
    );
    s += "Monodromy matrix M(T):\n";
    s += &matrix_lines(&r.monodromy);
    let _ = writeln!(s, "qdet M(T): {}", num(r.qdet));
    let _ = writeln!(s, "K(T) = M M^* eigenvalues: {}, {} (root residual {})", num(r.k.kappa[0]), num(r.k.kappa[1]), num(r.k.root_residual));
    let _ = writeln!(s, "Re ρ1 + Re ρ2 - Re tr M(T): {}", num(r.trace_identity_residual));
    let _ = writeln!(s, "|ρ1||ρ2| - 1: {}", num(r.modulus_product_residual));
    s += "Evidence (multipliers):\n";
    s += &verdict_lines(&r.verdict_multipliers);
    s
}

fn opt(x: &Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

const SWEEP_HEADER: [&str; 9] =
    ["p", "re_trace", "frob_sq", "abs_rho1", "abs_rho2", "verdict_trace", "verdict_frobenius", "verdict_multipliers", "error"];

fn kind(k: &Option<StabilityKind>) -> String {
    k.map(|k| serde_json::to_value(k).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()).unwrap_or_default()
}

fn sweep_fields(r: &SweepRow) -> Vec<String> {
    vec![
        num(r.p),
        opt(&r.re_trace),
        opt(&r.frob_sq),
        opt(&r.abs_rho1),
        opt(&r.abs_rho2),
        kind(&r.verdict_trace),
        kind(&r.verdict_frobenius),
        kind(&r.verdict_multipliers),
        r.error.clone().unwrap_or_default(),
    ]
}

fn sweep_text(rows: &[SweepRow]) -> String {
    let body: Vec<Vec<Vec<String>>> = rows.iter().map(|r| sweep_fields(r).into_iter().map(|f| vec![f]).collect()).collect();
    table(&SWEEP_HEADER, &body)
}

fn csv(report: &Report) -> Result<String> {
    let mut w = ::csv::Writer::from_writer(Vec::new());
    let err = |e: ::csv::Error| CliError::Usage(format!("csv: {e}"));
    match &report.result {
        Analysis::Constant(r) => write_samples(&mut w, &r.samples).map_err(err)?,
        Analysis::Periodic(r) => write_samples(&mut w, &r.samples).map_err(err)?,
        Analysis::Hill(h) => {
            let r = &h.report;
            let moduli: Vec<f64> = r.multipliers.values().iter().map(|z| z.abs()).collect();
            w.write_record(&SWEEP_HEADER[1..8]).map_err(err)?;
            let row = SweepRow {
                p: 0.0,
                re_trace: Some(r.re_trace),
                frob_sq: Some(r.frob_sq),
                abs_rho1: moduli.first().copied(),
                abs_rho2: moduli.get(1).copied(),
                verdict_trace: Some(r.verdict_trace.kind),
                verdict_frobenius: Some(r.verdict_frobenius.kind),
                verdict_multipliers: Some(r.verdict_multipliers.kind),
                error: None,
            };
            w.write_record(&sweep_fields(&row)[1..8]).map_err(err)?;
        }
        Analysis::Sweep(rows) => {
            w.write_record(SWEEP_HEADER).map_err(err)?;
            for r in rows {
                w.write_record(sweep_fields(r)).map_err(err)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::Usage(format!("csv: {e}")))
}

/// `t`, then the four components of every entry in row-major order.
fn write_samples<W: std::io::Write>(w: &mut ::csv::Writer<W>, samples: &Samples) -> std::result::Result<(), ::csv::Error> {
    let n = samples.states.first().map_or(0, QMatrix::rows);
    let mut header = vec!["t".to_string()];
    for r in 1..=n {
        for c in 1..=n {
            header.extend((0..4).map(|k| format!("m{r}{c}_q{k}")));
        }
    }
    w.write_record(&header)?;
    for (t, m) in samples.times.iter().zip(&samples.states) {
            let mut rec = vec![num(*t)];
        rec.extend(m.entries().iter().flat_map(|q| q.components()).map(num));
        w.write_record(&rec)?;
    }
    Ok(())
}

/// Boxed table; every cell may span several lines.
fn table(headers: &[&str], rows: &[Vec<Vec<String>>]) -> String {
    let width = |s: &str| s.chars().count();
    let mut widths: Vec<usize> = headers.iter().map(|h| width(h)).collect();
    for row in rows {
        for (c, cell) in row.iter().enumerate() {
            for line in cell {
                widths[c] = widths[c].max(width(line));
            }
        }
    }
    let rule: String = widths.iter().map(|w| format!("+{}", "-".repeat(w + 2))).collect::<String>() + "+\n";
    let line = |cells: Vec<&str>| -> String {
        cells.iter().zip(&widths).map(|(c, w)| format!("| {c}{} ", " ".repeat(w - width(c)))).collect::<String>() + "|\n"
    };
    let mut s = rule.clone();
    s += &line(headers.to_vec());
    s += &rule;
    for row in rows {
        let height = row.iter().map(Vec::len).max().unwrap_or(0).max(1);
        for k in 0..height {
            s += &line(row.iter().map(|cell| cell.get(k).map_or("", String::as_str)).collect());
        }
        s += &rule;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_layout() {
        let t = table(&["a", "bb"], &[vec![vec!["x".into()], vec!["1".into(), "222".into()]]]);
        let expected = "+---+-----+\n| a | bb  |\n+---+-----+\n| x | 1   |\n|   | 222 |\n+---+-----+\n";
        assert_eq!(t, expected);
    }

    #[test]
    fn sweep_fields_leave_failures_blank() {
        let row = SweepRow {
            p: 0.5,
            re_trace: None,
            frob_sq: None,
            abs_rho1: None,
            abs_rho2: None,
            verdict_trace: None,
            verdict_frobenius: None,
            verdict_multipliers: None,
            error: Some("boom".into()),
        };
        assert_eq!(sweep_fields(&row), vec!["0.5", "", "", "", "", "", "", "", "boom"]);
        let ok = SweepRow { verdict_trace: Some(StabilityKind::AsymptoticallyStable), error: None, ..row };
        assert_eq!(sweep_fields(&ok)[5], "asymptotically_stable");
    }
}
