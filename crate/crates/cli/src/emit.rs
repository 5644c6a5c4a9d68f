//! Result emission: delimiter-separated tables and plot-data series.
//!
//! Numbers are printed with 9 significant digits (`{:.8e}`); the table
//! parser reads that format back, and emit→parse→emit is byte-identical,
//! which the format tests pin down.

use std::fmt::Write as _;
use std::path::Path;

use seqweak::weakform::{AnalyticRefs, Measured};

use crate::harness::{SweepResult, SweepRow};
use crate::{HarnessError, Result};

/// Output flavors for sweep results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    /// One CSV row per θ with a header line.
    Table,
    /// Gnuplot-style blocks: one (theta, value, se) series per quantity,
    /// measured and analytic, separated by blank lines.
    PlotData,
}

impl core::str::FromStr for EmitFormat {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(EmitFormat::Table),
            "plotdata" => Ok(EmitFormat::PlotData),
            other => Err(HarnessError::SpecParse(format!(
                "unknown format {other:?}; expected table or plotdata"
            ))),
        }
    }
}

pub const TABLE_HEADER: &str = "theta,pi_psi_w,pi_psi_se,pi_v_w,pi_v_se,seq_w,seq_se,\
analytic_pi_psi,analytic_pi_v,analytic_seq,postselect_prob,status";

fn num(x: f64) -> String {
    format!("{x:.8e}")
}

/// Renders the CSV table. Errors on an empty result.
pub fn render_table(result: &SweepResult) -> Result<String> {
    if result.rows.is_empty() {
        return Err(HarnessError::EmptyResult);
    }
    let mut out = String::new();
    let _ = writeln!(out, "{TABLE_HEADER}");
    for r in &result.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            num(r.theta),
            num(r.pi_psi.value),
            num(r.pi_psi.stderr),
            num(r.pi_v.value),
            num(r.pi_v.stderr),
            num(r.seq.value),
            num(r.seq.stderr),
            num(r.analytic.pi_psi),
            num(r.analytic.pi_v),
            num(r.analytic.seq),
            num(r.postselect_prob),
            r.status.as_str(),
        );
    }
    Ok(out)
}

/// Parses a table rendered by [`render_table`] back into rows.
pub fn parse_table(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == TABLE_HEADER => {}
        other => {
            return Err(HarnessError::TableParse(format!(
                "missing or unexpected header: {other:?}"
            )))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 12 {
            return Err(HarnessError::TableParse(format!(
                "row {}: expected 12 fields, found {}",
                i + 1,
                fields.len()
            )));
        }
        let f = |j: usize| -> Result<f64> {
            fields[j].parse().map_err(|_| {
                HarnessError::TableParse(format!("row {}: bad number {:?}", i + 1, fields[j]))
            })
        };
        rows.push(SweepRow {
            theta: f(0)?,
            pi_psi: Measured {
                value: f(1)?,
                stderr: f(2)?,
            },
            pi_v: Measured {
                value: f(3)?,
                stderr: f(4)?,
            },
            seq: Measured {
                value: f(5)?,
                stderr: f(6)?,
            },
            analytic: AnalyticRefs {
                pi_psi: f(7)?,
                pi_v: f(8)?,
                seq: f(9)?,
            },
            postselect_prob: f(10)?,
            status: fields[11].parse()?,
        });
    }
    if rows.is_empty() {
        return Err(HarnessError::EmptyResult);
    }
    Ok(rows)
}

type MeasuredColumn = fn(&SweepRow) -> Measured;
type AnalyticColumn = fn(&SweepRow) -> f64;

/// Renders gnuplot-style plot data: six series (measured and analytic for
/// each quantity), blocks separated by two blank lines so `index` selects a
/// series. Degenerate rows print NaN, which plotting tools skip.
pub fn render_plotdata(result: &SweepResult) -> Result<String> {
    if result.rows.is_empty() {
        return Err(HarnessError::EmptyResult);
    }
    let mut out = String::new();
    let _ = writeln!(out, "# sweep mode: {}", result.mode);
    let measured: [(&str, MeasuredColumn); 3] = [
        ("measured_pi_psi", |r| r.pi_psi),
        ("measured_pi_v", |r| r.pi_v),
        ("measured_seq", |r| r.seq),
    ];
    for (name, get) in measured {
        let _ = writeln!(out, "# series: {name} (theta value se)");
        for r in &result.rows {
            let m = get(r);
            let _ = writeln!(out, "{} {} {}", num(r.theta), num(m.value), num(m.stderr));
        }
        out.push_str("\n\n");
    }
    let analytic: [(&str, AnalyticColumn); 3] = [
        ("analytic_pi_psi", |r| r.analytic.pi_psi),
        ("analytic_pi_v", |r| r.analytic.pi_v),
        ("analytic_seq", |r| r.analytic.seq),
    ];
    for (name, get) in analytic {
        let _ = writeln!(out, "# series: {name} (theta value)");
        for r in &result.rows {
            let _ = writeln!(out, "{} {}", num(r.theta), num(get(r)));
        }
        out.push_str("\n\n");
    }
    Ok(out)
}

/// Renders `result` in `format` and writes it to `path`.
pub fn write_result(result: &SweepResult, format: EmitFormat, path: &Path) -> Result<()> {
    let text = match format {
        EmitFormat::Table => render_table(result)?,
        EmitFormat::PlotData => render_plotdata(result)?,
    };
    std::fs::write(path, text)?;
    Ok(())
}
