//! Command-line front end. `main` parses [`Cli`] and hands it to [`run`].

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand};

use crate::eval::{
    batch_evaluate, display_percent, parse_manifest, read_report, write_csv, write_plot_data,
    BatchSummary, EvalError, ReportError,
};
use crate::fetcher::{resolve_charset, FetchedPage, Fetcher, SourceUrl};
use crate::pipeline::{transform_fetched, transform_url, PipelineError, TransformConfig, ViewSettings};
use crate::service::{self, AppState, ConfigError, ServiceConfig, ServiceError};

/// Base URL for documents read from disk.
pub const FILE_BASE: &str = "http://local.invalid/";

#[derive(Debug, Parser)]
#[command(name = "clearlens", version, about = "Re-skin web pages in high-contrast Clear Print")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides `listen_address`, e.g. 0.0.0.0:8080.
        #[arg(long)]
        listen: Option<String>,
    },
    /// Transform one page (an http(s) URL or a file) and write the result.
    Transform {
        target: String,
        #[arg(long)]
        preset: Option<String>,
        /// Font scale, clamped to 0.75..=2.
        #[arg(long)]
        scale: Option<f64>,
        /// Output file; standard output when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Where rewritten links point; defaults to the config's public_base.
        #[arg(long)]
        service_base: Option<String>,
    },
    /// Measure a batch of URLs, or summarize an existing report.
    Eval {
        /// Manifest of `label,url` lines.
        #[arg(long, required_unless_present = "replay")]
        urls: Option<PathBuf>,
        /// CSV report to write.
        #[arg(long, required_unless_present = "replay")]
        out: Option<PathBuf>,
        /// Summarize a report instead of fetching. Takes the report path, or
        /// reads the one named by --urls.
        #[arg(long, num_args = 0..=1, value_name = "CSV")]
        replay: Option<Option<PathBuf>>,
        /// Also write nlt.tsv, wlt.tsv and conversion.tsv here.
        #[arg(long)]
        plot_dir: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        #[arg(long, default_value_t = 4)]
        parallelism: usize,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Service(#[from] ServiceError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Report { path: PathBuf, source: ReportError },
    #[error("{0} lists no URLs")]
    EmptyManifest(PathBuf),
    #[error("{0}")]
    Usage(String),
}

/// Runs one command and returns the process exit code. Errors map to 1.
pub async fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Serve { config, listen } => {
            let mut cfg = ServiceConfig::load(config.as_deref())?;
            if let Some(listen) = listen {
                cfg.listen_address = listen;
                cfg.validate()?;
            }
            service::serve(cfg).await?;
            Ok(0)
        }
        Command::Transform {
            target,
            preset,
            scale,
            out,
            config,
            service_base,
        } => {
            let cfg = ServiceConfig::load(config.as_deref())?;
            let view = ViewSettings { preset, scale };
            transform(&cfg, &target, &view, service_base.as_deref(), out.as_deref()).await?;
            Ok(0)
        }
        Command::Eval {
            urls,
            out,
            replay,
            plot_dir,
            preset,
            parallelism,
            config,
        } => {
            if let Some(replay) = replay {
                let path = replay.or(urls).ok_or_else(|| {
                    CliError::Usage("--replay needs a report path, either directly or via --urls".into())
                })?;
                return replay_report(&path, out.as_deref(), plot_dir.as_deref());
            }
            let (Some(urls), Some(out)) = (urls, out) else {
                return Err(CliError::Usage("eval needs --urls and --out".into()));
            };
            let cfg = ServiceConfig::load(config.as_deref())?;
            let view = ViewSettings { preset, scale: None };
            evaluate(&cfg, &view, &urls, &out, plot_dir.as_deref(), parallelism).await
        }
    }
}

/// True when `target` names a URL rather than a file: it starts with a
/// scheme followed by `//`, or is any non-file scheme like `javascript:`.
fn is_url(target: &str) -> bool {
    match target.split_once(':') {
        Some((scheme, rest)) => {
            let valid = scheme.len() > 1
                && scheme.starts_with(|c: char| c.is_ascii_alphabetic())
                && scheme
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
            valid && (rest.starts_with("//") || !Path::new(target).exists())
        }
        None => false,
    }
}

async fn transform(
    cfg: &ServiceConfig,
    target: &str,
    view: &ViewSettings,
    service_base: Option<&str>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let catalog = AppState::new(cfg.clone())?.catalog().clone();
    let tcfg = TransformConfig::for_view(
        &catalog,
        &cfg.default_preset,
        view,
        service_base.unwrap_or(&cfg.public_base),
        cfg.fetch.clone(),
    )?;
    let page = if is_url(target) {
        let url = SourceUrl::parse(target).map_err(|e| PipelineError::Fetch(e.into()))?;
        let fetcher = Fetcher::new(cfg.fetch.clone()).map_err(PipelineError::from)?;
        transform_url(&fetcher, &url, &tcfg).await?
    } else {
        let path = PathBuf::from(target);
        let body = std::fs::read(&path).map_err(|source| CliError::Read {
            path: path.clone(),
            source,
        })?;
        let base = SourceUrl::parse(FILE_BASE).expect("static URL");
        let fetched = FetchedPage {
            requested_url: base.clone(),
            final_url: base,
            status: 200,
            content_type: "text/html".into(),
            charset: resolve_charset(None, &body).to_string(),
            body,
            fetch_duration: Duration::ZERO,
        };
        transform_fetched(&fetched, &tcfg)?
    };
    match out {
        Some(path) => std::fs::write(path, &page.html).map_err(|source| CliError::Write {
            path: path.to_path_buf(),
            source,
        })?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(page.html.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|source| CliError::Write {
                    path: PathBuf::from("<stdout>"),
                    source,
                })?;
        }
    }
    eprintln!(
        "{} transform_ms={:.3}",
        page.stats,
        page.transform_duration.as_secs_f64() * 1000.0
    );
    Ok(())
}

fn print_summary(summary: &BatchSummary) {
    println!("rows: {}", summary.rows.len());
    println!(
        "mean conversion rate: {} ({})",
        trim(summary.mean_conversion_rate),
        display_percent(summary.mean_conversion_rate)
    );
    println!(
        "mean nlt: {} ms ({} s)",
        trim(summary.mean_nlt_ms),
        trim(summary.mean_nlt_ms / 1000.0)
    );
    println!(
        "mean wlt: {} ms ({} s)",
        trim(summary.mean_wlt_ms),
        trim(summary.mean_wlt_ms / 1000.0)
    );
}

fn trim(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn write_outputs(
    summary: &BatchSummary,
    out: Option<&Path>,
    plot_dir: Option<&Path>,
) -> Result<(), CliError> {
    if let Some(out) = out {
        let file = std::fs::File::create(out).map_err(|source| CliError::Write {
            path: out.to_path_buf(),
            source,
        })?;
        write_csv(summary, std::io::BufWriter::new(file)).map_err(|source| CliError::Report {
            path: out.to_path_buf(),
            source,
        })?;
    }
    if let Some(dir) = plot_dir {
        write_plot_data(summary, dir).map_err(|source| CliError::Report {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    Ok(())
}

fn replay_report(path: &Path, out: Option<&Path>, plot_dir: Option<&Path>) -> Result<u8, CliError> {
    let file = std::fs::File::open(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let summary = read_report(std::io::BufReader::new(file)).map_err(|source| CliError::Report {
        path: path.to_path_buf(),
        source,
    })?;
    if summary.rows.is_empty() {
        return Err(CliError::EmptyManifest(path.to_path_buf()));
    }
    write_outputs(&summary, out, plot_dir)?;
    print_summary(&summary);
    Ok(0)
}

async fn evaluate(
    cfg: &ServiceConfig,
    view: &ViewSettings,
    urls: &Path,
    out: &Path,
    plot_dir: Option<&Path>,
    parallelism: usize,
) -> Result<u8, CliError> {
    let text = std::fs::read_to_string(urls).map_err(|source| CliError::Read {
        path: urls.to_path_buf(),
        source,
    })?;
    let manifest = parse_manifest(&text).map_err(|source| CliError::Report {
        path: urls.to_path_buf(),
        source,
    })?;
    if manifest.is_empty() {
        return Err(CliError::EmptyManifest(urls.to_path_buf()));
    }
    let catalog = AppState::new(cfg.clone())?.catalog().clone();
    let tcfg = TransformConfig::for_view(
        &catalog,
        &cfg.default_preset,
        view,
        &cfg.public_base,
        cfg.fetch.clone(),
    )?;
    let fetcher = Fetcher::new(cfg.fetch.clone()).map_err(PipelineError::from)?;
    match batch_evaluate(&fetcher, &manifest, &tcfg, parallelism).await {
        Ok(summary) => {
            write_outputs(&summary, Some(out), plot_dir)?;
            for f in &summary.failures {
                eprintln!("excluded {} {}: {}", f.label, f.url, f.error);
            }
            print_summary(&summary);
            Ok(0)
        }
        Err(EvalError::AllUrlsFailed { failures }) => {
            for f in &failures {
                eprintln!("failed {} {}: {}", f.label, f.url, f.error);
            }
            eprintln!("all {} URLs failed; no report written", failures.len());
            Ok(2)
        }
        Err(EvalError::EmptyBatch) => Err(CliError::EmptyManifest(urls.to_path_buf())),
    }
}
