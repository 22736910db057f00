//! Summarize an existing report without fetching anything.
//!
//! cargo run --example replay_report -- [report.csv]

use clearlens::eval::{display_percent, read_report};

fn main() -> anyhow::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/batch_results.csv").into());
    let summary = read_report(std::fs::File::open(&path)?)?;
    for r in &summary.rows {
        println!("{:<4} nlt {:>6} ms  wlt {:>6} ms  {:>3}%", r.batch_label, r.nlt_ms, r.wlt_ms, r.conversion_rate);
    }
    println!(
        "mean {:.1} ({}), nlt {:.3} s, wlt {:.3} s",
        summary.mean_conversion_rate,
        display_percent(summary.mean_conversion_rate),
        summary.mean_nlt_ms / 1000.0,
        summary.mean_wlt_ms / 1000.0
    );
    Ok(())
}
