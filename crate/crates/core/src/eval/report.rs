//! CSV reports and plot data.
//!
//! Report layout:
//!
//! ```text
//! # nlt model: ...
//! batch,url,nlt_ms,wlt_ms,conversion_rate
//! B1,http://example.com/,12.5,3.25,100
//! summary,,12.5,3.25,100
//! ```

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use super::{summarize, BatchSummary, ConversionReport};

/// Written at the top of every report so the timings are interpretable.
pub const NLT_MODEL: &str = "nlt model: page fetch + serial fetch of each linked stylesheet \
                             and script; wlt model: page fetch + transform";

const HEADER: [&str; 5] = ["batch", "url", "nlt_ms", "wlt_ms", "conversion_rate"];
const SUMMARY_LABEL: &str = "summary";

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: {reason}")]
    InvalidRow { line: usize, reason: String },
}

/// Formats a number with at most three decimals and no trailing zeros.
fn num(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// A percentage rounded to a whole number, e.g. `82%`.
pub fn display_percent(rate: f64) -> String {
    format!("{}%", rate.round())
}

pub fn write_csv(summary: &BatchSummary, mut out: impl Write) -> Result<(), ReportError> {
    writeln!(out, "# {NLT_MODEL}")?;
    {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut out);
        w.write_record(HEADER)?;
        for r in &summary.rows {
            w.write_record([
                r.batch_label.as_str(),
                r.url.as_str(),
                &num(r.nlt_ms),
                &num(r.wlt_ms),
                &num(r.conversion_rate),
            ])?;
        }
        w.write_record([
            SUMMARY_LABEL,
            "",
            &num(summary.mean_nlt_ms),
            &num(summary.mean_wlt_ms),
            &num(summary.mean_conversion_rate),
        ])?;
        w.flush()?;
    }
    for f in &summary.failures {
        let error = f.error.replace('\n', " ");
        writeln!(out, "# failed {} {}: {}", f.label, f.url, error)?;
    }
    Ok(())
}

/// Reads the rows of a report, skipping comments and summary rows, and
/// recomputes the summary from them.
pub fn read_report(input: impl Read) -> Result<BatchSummary, ReportError> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != HEADER {
        return Err(ReportError::InvalidRow {
            line: 1,
            reason: format!("expected header {}", HEADER.join(",")),
        });
    }
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.get(0) == Some(SUMMARY_LABEL) {
            continue;
        }
        let field = |i: usize, name: &str| -> Result<f64, ReportError> {
            let raw = record.get(i).unwrap_or_default();
            let v: f64 = raw.parse().map_err(|_| ReportError::InvalidRow {
                line,
                reason: format!("{name} {raw:?} is not a number"),
            })?;
            if !v.is_finite() || v < 0.0 {
                return Err(ReportError::InvalidRow {
                    line,
                    reason: format!("{name} must be a non-negative number"),
                });
            }
            Ok(v)
        };
        let conversion_rate = field(4, "conversion_rate")?;
        if conversion_rate > 100.0 {
            return Err(ReportError::InvalidRow {
                line,
                reason: "conversion_rate must be at most 100".into(),
            });
        }
        rows.push(ConversionReport {
            batch_label: record.get(0).unwrap_or_default().to_string(),
            url: record.get(1).unwrap_or_default().to_string(),
            nlt_ms: field(2, "nlt_ms")?,
            wlt_ms: field(3, "wlt_ms")?,
            conversion_rate,
        });
    }
    Ok(summarize(rows, Vec::new()))
}

/// Writes `nlt.tsv`, `wlt.tsv` and `conversion.tsv` into `dir`: one line
/// per batch label with the mean over that label's rows, in first-seen
/// order.
pub fn write_plot_data(summary: &BatchSummary, dir: &Path) -> Result<(), ReportError> {
    std::fs::create_dir_all(dir)?;
    let mut order: Vec<&str> = Vec::new();
    let mut groups: BTreeMap<&str, Vec<&ConversionReport>> = BTreeMap::new();
    for r in &summary.rows {
        if !groups.contains_key(r.batch_label.as_str()) {
            order.push(&r.batch_label);
        }
        groups.entry(&r.batch_label).or_default().push(r);
    }
    type Column = fn(&ConversionReport) -> f64;
    let series: [(&str, Column); 3] = [
        ("nlt.tsv", |r| r.nlt_ms),
        ("wlt.tsv", |r| r.wlt_ms),
        ("conversion.tsv", |r| r.conversion_rate),
    ];
    for (file, value) in series {
        let mut out = String::new();
        for label in &order {
            let rows = &groups[label];
            let mean = rows.iter().map(|r| value(r)).sum::<f64>() / rows.len() as f64;
            out.push_str(&format!("{label}\t{}\n", num(mean)));
        }
        std::fs::write(dir.join(file), out)?;
    }
    Ok(())
}
