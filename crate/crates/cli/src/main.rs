//! Command-line surface for the contract metrics pipeline.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 network error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use solmetrics::corpus::fetch::{fetch_contracts, FetchConfig, FetchError};
use solmetrics::corpus::{load_corpus, Address, CorpusError};
use solmetrics::report::svg::{render_ccdf_svg, PlotModels};
use solmetrics::report::{
    ccdf_tsv, fit_metric, fit_report_json, json_mirror_path, parse_ccdf_tsv, parse_fit_report,
    render_summary_text, summarize_table, summary_json, ModelChoice, ReportError,
};
use solmetrics::{Metric, MetricsTable, Thresholds};

#[derive(Parser)]
#[command(
    name = "solmetrics",
    version,
    about = "Solidity contract corpus analyzer: metrics, statistics and distribution fits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract per-contract metrics into a CSV table (JSON mirror alongside)
    Scan {
        /// Corpus directory of `<address>.sol` files, or a JSON line-file
        #[arg(long)]
        corpus: PathBuf,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
        /// Drop byte-identical duplicate sources, keeping the smallest address
        #[arg(long)]
        dedup: bool,
    },
    /// Summarize a metrics table into per-metric statistics
    Summary {
        /// Metrics CSV produced by `scan`
        #[arg(long)]
        metrics: PathBuf,
        /// Output text table path (JSON mirror alongside)
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit tail models to one metric column and export its CCDF
    Fit {
        /// Metrics CSV produced by `scan`
        #[arg(long)]
        metrics: PathBuf,
        /// Metric column name, e.g. `loc`
        #[arg(long)]
        metric: String,
        /// Model(s) to fit
        #[arg(long, value_enum, default_value_t = ModelArg::Both)]
        model: ModelArg,
        /// Output fit-report JSON path
        #[arg(long)]
        out: PathBuf,
        /// Output CCDF TSV path
        #[arg(long)]
        ccdf: PathBuf,
        /// Minimum tail size for the power-law cutoff scan
        #[arg(long = "n-min", default_value_t = solmetrics::report::DEFAULT_N_MIN)]
        n_min: usize,
        /// KS distance at or below which a power law is deemed plausible
        #[arg(long, default_value_t = 0.05)]
        ks_threshold: f64,
        /// Log-log R² at or above which a lognormal is deemed plausible
        #[arg(long, default_value_t = 0.95)]
        r2_threshold: f64,
    },
    /// Render a log-log CCDF chart with optional fitted curves
    Plot {
        /// CCDF TSV produced by `fit`
        #[arg(long)]
        ccdf: PathBuf,
        /// Fit-report JSON produced by `fit`
        #[arg(long)]
        fit: Option<PathBuf>,
        /// Output SVG path
        #[arg(long)]
        out: PathBuf,
    },
    /// Fetch verified contract sources from an Etherscan-compatible API
    Fetch {
        /// File with one contract address per line
        #[arg(long)]
        addresses: PathBuf,
        /// Output corpus directory
        #[arg(long)]
        out: PathBuf,
        /// Request rate limit in requests per second
        #[arg(long, default_value_t = solmetrics::corpus::fetch::DEFAULT_RATE_LIMIT)]
        rate: f64,
        /// API key; defaults to the ETHERSCAN_API_KEY environment variable
        #[arg(long)]
        api_key: Option<String>,
        /// API endpoint, for self-hosted Etherscan-compatible services
        #[arg(long)]
        base_url: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Powerlaw,
    Lognormal,
    Both,
}

impl From<ModelArg> for ModelChoice {
    fn from(arg: ModelArg) -> ModelChoice {
        match arg {
            ModelArg::Powerlaw => ModelChoice::Powerlaw,
            ModelArg::Lognormal => ModelChoice::Lognormal,
            ModelArg::Both => ModelChoice::Both,
        }
    }
}

enum CliError {
    Usage(String),
    Data(String),
    Network(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Network(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Network(m) => m,
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(err: CorpusError) -> CliError {
        CliError::Data(err.to_string())
    }
}

impl From<ReportError> for CliError {
    fn from(err: ReportError) -> CliError {
        CliError::Data(err.to_string())
    }
}

impl From<FetchError> for CliError {
    fn from(err: FetchError) -> CliError {
        match err {
            FetchError::EmptyApiKey | FetchError::InvalidRateLimit(_) => {
                CliError::Usage(err.to_string())
            }
            FetchError::InvalidApiKey => CliError::Network(err.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let kind = err.kind();
            let _ = err.print();
            return if matches!(kind, ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Scan { corpus, out, dedup } => cmd_scan(&corpus, &out, dedup),
        Command::Summary { metrics, out } => cmd_summary(&metrics, &out),
        Command::Fit {
            metrics,
            metric,
            model,
            out,
            ccdf,
            n_min,
            ks_threshold,
            r2_threshold,
        } => cmd_fit(
            &metrics,
            &metric,
            model.into(),
            &out,
            &ccdf,
            n_min,
            Thresholds {
                ks_d_max: ks_threshold,
                r2_min: r2_threshold,
            },
        ),
        Command::Plot { ccdf, fit, out } => cmd_plot(&ccdf, fit.as_deref(), &out),
        Command::Fetch {
            addresses,
            out,
            rate,
            api_key,
            base_url,
        } => cmd_fetch(&addresses, &out, rate, api_key, base_url),
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|err| CliError::Data(format!("cannot read {}: {err}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|err| CliError::Data(format!("cannot write {}: {err}", path.display())))
}

fn report_diagnostics(diagnostics: &[String]) {
    for diagnostic in diagnostics {
        eprintln!("warning: {diagnostic}");
    }
}

fn cmd_scan(corpus_path: &Path, out: &Path, dedup: bool) -> Result<(), CliError> {
    let corpus = load_corpus(corpus_path, dedup)?;
    report_diagnostics(corpus.diagnostics());
    if dedup {
        eprintln!(
            "dedup: removed {} duplicate record(s)",
            corpus.duplicates_removed()
        );
    }
    let (table, diagnostics) = MetricsTable::from_corpus(&corpus);
    report_diagnostics(&diagnostics);
    write_file(out, &table.to_csv())?;
    write_file(&json_mirror_path(out), &table.to_json())?;
    eprintln!(
        "scan: wrote {} row(s) to {}",
        table.rows.len(),
        out.display()
    );
    Ok(())
}

fn cmd_summary(metrics: &Path, out: &Path) -> Result<(), CliError> {
    let table = MetricsTable::from_csv(&read_text(metrics)?)?;
    let rows = summarize_table(&table)?;
    write_file(out, &render_summary_text(&rows))?;
    write_file(&json_mirror_path(out), &summary_json(&rows))?;
    Ok(())
}

fn cmd_fit(
    metrics: &Path,
    metric_name: &str,
    models: ModelChoice,
    out: &Path,
    ccdf_out: &Path,
    n_min: usize,
    thresholds: Thresholds,
) -> Result<(), CliError> {
    let metric = Metric::parse(metric_name).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown metric {metric_name:?}; expected one of: {}",
            Metric::ALL.map(|m| m.name()).join(", ")
        ))
    })?;
    let table = MetricsTable::from_csv(&read_text(metrics)?)?;
    let outcome = fit_metric(&table, metric, models, n_min, thresholds)?;
    report_diagnostics(&outcome.diagnostics);
    write_file(out, &fit_report_json(&outcome.report))?;
    let (tsv, skipped) = ccdf_tsv(&outcome.ccdf);
    if skipped > 0 {
        eprintln!("warning: {skipped} nonpositive point(s) omitted from CCDF export");
    }
    write_file(ccdf_out, &tsv)?;
    eprintln!(
        "fit: {} verdict: {}",
        metric.name(),
        outcome.report.verdict.as_str()
    );
    Ok(())
}

fn cmd_plot(ccdf: &Path, fit: Option<&Path>, out: &Path) -> Result<(), CliError> {
    let points = parse_ccdf_tsv(&read_text(ccdf)?)?;
    let report = match fit {
        Some(path) => Some(parse_fit_report(&read_text(path)?)?),
        None => None,
    };
    let mut models = PlotModels::default();
    let mut title = None;
    if let Some(report) = &report {
        if let Some(fit) = &report.powerlaw {
            models.powerlaw = Some((fit, fit.n_tail as f64 / report.n as f64));
        }
        models.lognormal = report.lognormal.as_ref();
        title = Some(report.metric_name.as_str());
    }
    let (svg, skipped) = render_ccdf_svg(&points, &models, title);
    if skipped > 0 {
        eprintln!("warning: {skipped} nonpositive point(s) skipped in plot");
    }
    write_file(out, &svg)
}

fn cmd_fetch(
    addresses_path: &Path,
    out_dir: &Path,
    rate: f64,
    api_key: Option<String>,
    base_url: Option<String>,
) -> Result<(), CliError> {
    let api_key = api_key
        .or_else(|| std::env::var("ETHERSCAN_API_KEY").ok())
        .unwrap_or_default();

    let mut addresses = Vec::new();
    for (idx, line) in read_text(addresses_path)?.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match Address::parse(line) {
            Ok(address) => addresses.push(address),
            Err(err) => eprintln!("warning: {}:{}: {err}", addresses_path.display(), idx + 1),
        }
    }

    let mut config = FetchConfig::new(api_key);
    config.rate_limit = rate;
    if let Some(base_url) = base_url {
        config.base_url = base_url;
    }
    let report = fetch_contracts(&addresses, &config)?;
    report_diagnostics(&report.diagnostics);

    fs::create_dir_all(out_dir)
        .map_err(|err| CliError::Data(format!("cannot create {}: {err}", out_dir.display())))?;
    for record in &report.records {
        let sol = out_dir.join(format!("{}.sol", record.address));
        write_file(&sol, &record.source)?;
        if let Some(abi) = &record.abi_json {
            write_file(&out_dir.join(format!("{}.abi.json", record.address)), abi)?;
        }
    }
    eprintln!(
        "fetch: {} contract(s) written, {} skipped",
        report.records.len(),
        report.diagnostics.len()
    );
    Ok(())
}
