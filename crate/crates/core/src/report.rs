//! Output surfaces: the per-contract metrics table (CSV + JSON), summary
//! tables, fit reports and CCDF exports.
//!
//! Every float in a text output is rendered to 6 significant digits via
//! [`fmt_sig`], which together with fixed schemas and deterministic
//! numerics makes all pipeline outputs byte-reproducible.

use std::thread;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::corpus::{Address, Corpus};
use crate::distfit::{
    empirical_ccdf, fit_lognormal, fit_powerlaw, EmpiricalCcdf, LogNormalFit, PowerLawFit,
};
use crate::metrics::{extract_metrics_detailed, Metric, MetricVector};
use crate::stats::{summarize, StatsError, SummaryStatistics};

pub mod svg;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("line {line}: {detail}")]
    Malformed { line: usize, detail: String },
    #[error("unknown metric {0:?}")]
    UnknownMetric(String),
    #[error("need at least 2 metric rows, got {0}")]
    TooFewRows(usize),
    #[error("metric column {metric} has too few values: {source}")]
    Column {
        metric: &'static str,
        source: StatsError,
    },
    #[error("CCDF input holds no plottable points")]
    EmptyCcdf,
}

/// Formats `v` with 6 significant digits, using positional notation for
/// moderate magnitudes and `me±k` scientific notation otherwise. Trailing
/// zeros are trimmed, so the rendering of integral values stays integral.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".to_string()
        } else if v > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent format");
    let exp: i32 = exp.parse().expect("exponent integer");
    if (-4..6).contains(&exp) {
        trim_zeros(&format!("{v:.*}", (5 - exp) as usize))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// Rounds to the value actually rendered by [`fmt_sig`]; applied to every
/// float placed in a JSON output.
fn round_sig(v: f64) -> f64 {
    fmt_sig(v).parse().unwrap_or(v)
}

fn json_num(v: f64) -> Value {
    json!(round_sig(v))
}

/// One metrics-table row: a contract address and its metric vector.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub address: Address,
    pub metrics: MetricVector,
}

/// The per-contract metrics table, rows ascending by address.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsTable {
    pub rows: Vec<MetricsRow>,
}

impl MetricsTable {
    /// Extracts metrics for every record. Extraction is pure per record,
    /// so large corpora are processed on multiple threads and merged back
    /// in address order.
    pub fn from_corpus(corpus: &Corpus) -> (MetricsTable, Vec<String>) {
        let records = corpus.records();
        let extracted: Vec<(MetricVector, Vec<String>)> = if records.len() < 32 {
            records.iter().map(extract_metrics_detailed).collect()
        } else {
            let workers = thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
                .min(records.len());
            let chunk_size = records.len().div_ceil(workers);
            thread::scope(|scope| {
                let handles: Vec<_> = records
                    .chunks(chunk_size)
                    .map(|chunk| {
                        scope.spawn(move || {
                            chunk
                                .iter()
                                .map(extract_metrics_detailed)
                                .collect::<Vec<_>>()
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .flat_map(|h| h.join().expect("extraction worker panicked"))
                    .collect()
            })
        };

        let mut rows = Vec::with_capacity(records.len());
        let mut diagnostics = Vec::new();
        for (record, (metrics, mut diags)) in records.iter().zip(extracted) {
            rows.push(MetricsRow {
                address: record.address.clone(),
                metrics,
            });
            diagnostics.append(&mut diags);
        }
        (MetricsTable { rows }, diagnostics)
    }

    /// The values of one metric column, skipping rows where the metric is
    /// absent; returns the samples and the exclusion count.
    pub fn column(&self, metric: Metric) -> (Vec<f64>, usize) {
        let mut samples = Vec::with_capacity(self.rows.len());
        let mut excluded = 0;
        for row in &self.rows {
            match row.metrics.value(metric) {
                Some(v) => samples.push(v as f64),
                None => excluded += 1,
            }
        }
        (samples, excluded)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("address");
        for metric in Metric::ALL {
            out.push(',');
            out.push_str(metric.name());
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(row.address.as_str());
            for metric in Metric::ALL {
                out.push(',');
                if let Some(v) = row.metrics.value(metric) {
                    out.push_str(&v.to_string());
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<MetricsTable, ReportError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(ReportError::Malformed {
            line: 1,
            detail: "empty metrics file".to_string(),
        })?;
        let expected: Vec<&str> = std::iter::once("address")
            .chain(Metric::ALL.iter().map(|m| m.name()))
            .collect();
        let got: Vec<&str> = header.split(',').collect();
        if got != expected {
            return Err(ReportError::Malformed {
                line: 1,
                detail: format!("unexpected header {header:?}"),
            });
        }

        let mut rows = Vec::new();
        for (idx, line) in lines {
            if line.is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != expected.len() {
                return Err(ReportError::Malformed {
                    line: lineno,
                    detail: format!("expected {} cells, got {}", expected.len(), cells.len()),
                });
            }
            let address = Address::parse(cells[0]).map_err(|err| ReportError::Malformed {
                line: lineno,
                detail: err.to_string(),
            })?;
            let value_of = |metric: Metric| -> Result<Option<u64>, ReportError> {
                let pos = Metric::ALL.iter().position(|m| *m == metric).unwrap() + 1;
                let cell = cells[pos];
                if cell.is_empty() {
                    return Ok(None);
                }
                cell.parse::<u64>()
                    .map(Some)
                    .map_err(|_| ReportError::Malformed {
                        line: lineno,
                        detail: format!("bad count {cell:?} in column {}", metric.name()),
                    })
            };
            let required = |v: Option<u64>, metric: Metric| -> Result<u64, ReportError> {
                v.ok_or_else(|| ReportError::Malformed {
                    line: lineno,
                    detail: format!("column {} must not be empty", metric.name()),
                })
            };
            let metrics = MetricVector {
                total_lines: required(value_of(Metric::TotalLines)?, Metric::TotalLines)?,
                blanks: required(value_of(Metric::Blanks)?, Metric::Blanks)?,
                comments: required(value_of(Metric::Comments)?, Metric::Comments)?,
                loc: required(value_of(Metric::Loc)?, Metric::Loc)?,
                contracts: required(value_of(Metric::Contracts)?, Metric::Contracts)?,
                functions: required(value_of(Metric::Functions)?, Metric::Functions)?,
                payable: required(value_of(Metric::Payable)?, Metric::Payable)?,
                events: required(value_of(Metric::Events)?, Metric::Events)?,
                mappings: required(value_of(Metric::Mappings)?, Metric::Mappings)?,
                modifiers: required(value_of(Metric::Modifiers)?, Metric::Modifiers)?,
                address_uses: required(value_of(Metric::AddressUses)?, Metric::AddressUses)?,
                cyclomatic: required(value_of(Metric::Cyclomatic)?, Metric::Cyclomatic)?,
                abi_size: value_of(Metric::AbiSize)?,
                bytecode_size: value_of(Metric::BytecodeSize)?,
            };
            rows.push(MetricsRow { address, metrics });
        }
        Ok(MetricsTable { rows })
    }

    /// JSON mirror of the CSV: an array of objects, one per contract.
    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = serde_json::Map::new();
                obj.insert("address".to_string(), json!(row.address.as_str()));
                for metric in Metric::ALL {
                    obj.insert(
                        metric.name().to_string(),
                        match row.metrics.value(metric) {
                            Some(v) => json!(v),
                            None => Value::Null,
                        },
                    );
                }
                Value::Object(obj)
            })
            .collect();
        let mut out = serde_json::to_string_pretty(&Value::Array(rows)).expect("json");
        out.push('\n');
        out
    }
}

/// One summary-table row. `stats` is absent when the column holds fewer
/// than two values.
#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub metric: Metric,
    pub excluded: usize,
    pub stats: Option<SummaryStatistics>,
}

/// Summarizes every metric column in fixed table order.
pub fn summarize_table(table: &MetricsTable) -> Result<Vec<SummaryRow>, ReportError> {
    if table.rows.len() < 2 {
        return Err(ReportError::TooFewRows(table.rows.len()));
    }
    Ok(Metric::ALL
        .into_iter()
        .map(|metric| {
            let (samples, excluded) = table.column(metric);
            SummaryRow {
                metric,
                excluded,
                stats: summarize(&samples).ok(),
            }
        })
        .collect())
}

const SUMMARY_COLUMNS: [&str; 10] = [
    "n", "mean", "median", "std", "max", "min", "iqr", "p10", "p90", "excluded",
];

pub fn render_summary_text(rows: &[SummaryRow]) -> String {
    let mut out = format!("{:<14}", "metric");
    for column in SUMMARY_COLUMNS {
        out.push_str(&format!("{column:>12}"));
    }
    out.push('\n');
    for row in rows {
        out.push_str(&format!("{:<14}", row.metric.name()));
        match &row.stats {
            Some(s) => {
                let cells = [
                    s.n.to_string(),
                    fmt_sig(s.mean),
                    fmt_sig(s.median),
                    fmt_sig(s.std),
                    fmt_sig(s.max),
                    fmt_sig(s.min),
                    fmt_sig(s.iqr),
                    fmt_sig(s.p10),
                    fmt_sig(s.p90),
                    row.excluded.to_string(),
                ];
                for cell in cells {
                    out.push_str(&format!("{cell:>12}"));
                }
            }
            None => {
                for i in 0..SUMMARY_COLUMNS.len() {
                    let cell = if i == SUMMARY_COLUMNS.len() - 1 {
                        row.excluded.to_string()
                    } else {
                        "-".to_string()
                    };
                    out.push_str(&format!("{cell:>12}"));
                }
            }
        }
        out.push('\n');
    }
    out
}

fn summary_stats_json(s: &SummaryStatistics) -> Value {
    json!({
        "n": s.n,
        "mean": json_num(s.mean),
        "median": json_num(s.median),
        "std": json_num(s.std),
        "max": json_num(s.max),
        "min": json_num(s.min),
        "iqr": json_num(s.iqr),
        "p10": json_num(s.p10),
        "p90": json_num(s.p90),
    })
}

/// JSON rendering of the summary: an object keyed by metric name.
pub fn summary_json(rows: &[SummaryRow]) -> String {
    let mut obj = serde_json::Map::new();
    for row in rows {
        let mut entry = match &row.stats {
            Some(s) => summary_stats_json(s),
            None => json!({}),
        };
        entry
            .as_object_mut()
            .unwrap()
            .insert("excluded".to_string(), json!(row.excluded));
        obj.insert(row.metric.name().to_string(), entry);
    }
    let mut out = serde_json::to_string_pretty(&Value::Object(obj)).expect("json");
    out.push('\n');
    out
}

/// Plausibility thresholds for the fit verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Power law is plausible when the tail KS distance is at most this.
    pub ks_d_max: f64,
    /// Lognormal is plausible when the log-log R² is at least this.
    pub r2_min: f64,
}

impl Default for Thresholds {
    fn default() -> Thresholds {
        Thresholds {
            ks_d_max: 0.05,
            r2_min: 0.95,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "powerlaw-plausible")]
    PowerlawPlausible,
    #[serde(rename = "lognormal-plausible")]
    LognormalPlausible,
    #[serde(rename = "both")]
    Both,
    #[serde(rename = "neither")]
    Neither,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::PowerlawPlausible => "powerlaw-plausible",
            Verdict::LognormalPlausible => "lognormal-plausible",
            Verdict::Both => "both",
            Verdict::Neither => "neither",
        }
    }
}

pub fn verdict(
    powerlaw: Option<&PowerLawFit>,
    lognormal: Option<&LogNormalFit>,
    thresholds: &Thresholds,
) -> Verdict {
    let pl = powerlaw.is_some_and(|fit| fit.ks_d <= thresholds.ks_d_max);
    let ln = lognormal.is_some_and(|fit| fit.r2_loglog >= thresholds.r2_min);
    match (pl, ln) {
        (true, true) => Verdict::Both,
        (true, false) => Verdict::PowerlawPlausible,
        (false, true) => Verdict::LognormalPlausible,
        (false, false) => Verdict::Neither,
    }
}

/// Distribution-fit report for one metric column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub metric_name: String,
    /// Number of values present in the column.
    pub n: usize,
    pub summary: SummaryStatistics,
    pub powerlaw: Option<PowerLawFit>,
    pub lognormal: Option<LogNormalFit>,
    pub verdict: Verdict,
    #[serde(default)]
    pub thresholds: Option<Thresholds>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelChoice {
    Powerlaw,
    Lognormal,
    Both,
}

impl ModelChoice {
    pub fn wants_powerlaw(self) -> bool {
        matches!(self, ModelChoice::Powerlaw | ModelChoice::Both)
    }

    pub fn wants_lognormal(self) -> bool {
        matches!(self, ModelChoice::Lognormal | ModelChoice::Both)
    }
}

/// Everything `fit` produces for one metric: the report, the empirical
/// CCDF of the column and any per-model diagnostics.
#[derive(Debug)]
pub struct FitOutcome {
    pub report: FitReport,
    pub ccdf: EmpiricalCcdf,
    pub diagnostics: Vec<String>,
}

/// Fits the requested models to one metric column. A model whose
/// preconditions fail is reported absent with a diagnostic instead of
/// aborting.
pub fn fit_metric(
    table: &MetricsTable,
    metric: Metric,
    models: ModelChoice,
    n_min: usize,
    thresholds: Thresholds,
) -> Result<FitOutcome, ReportError> {
    let (samples, _) = table.column(metric);
    let summary = summarize(&samples).map_err(|source| ReportError::Column {
        metric: metric.name(),
        source,
    })?;
    let ccdf = empirical_ccdf(&samples).expect("non-empty column");

    let mut diagnostics = Vec::new();
    let powerlaw = if models.wants_powerlaw() {
        match fit_powerlaw(&samples, n_min) {
            Ok(fit) => Some(fit),
            Err(err) => {
                diagnostics.push(format!("{}: powerlaw not fitted: {err}", metric.name()));
                None
            }
        }
    } else {
        None
    };
    let lognormal = if models.wants_lognormal() {
        match fit_lognormal(&samples) {
            Ok(fit) => Some(fit),
            Err(err) => {
                diagnostics.push(format!("{}: lognormal not fitted: {err}", metric.name()));
                None
            }
        }
    } else {
        None
    };

    let verdict = verdict(powerlaw.as_ref(), lognormal.as_ref(), &thresholds);
    Ok(FitOutcome {
        report: FitReport {
            metric_name: metric.name().to_string(),
            n: samples.len(),
            summary,
            powerlaw,
            lognormal,
            verdict,
            thresholds: Some(thresholds),
        },
        ccdf,
        diagnostics,
    })
}

/// JSON rendering of a fit report, floats rounded to 6 significant digits.
pub fn fit_report_json(report: &FitReport) -> String {
    let powerlaw = match &report.powerlaw {
        Some(fit) => json!({
            "alpha": json_num(fit.alpha),
            "x0": json_num(fit.x0),
            "n_tail": fit.n_tail,
            "ks_d": json_num(fit.ks_d),
        }),
        None => Value::Null,
    };
    let lognormal = match &report.lognormal {
        Some(fit) => json!({
            "mu": json_num(fit.mu),
            "sigma": json_num(fit.sigma),
            "n_used": fit.n_used,
            "dropped_nonpositive": fit.dropped_nonpositive,
            "ks_d": json_num(fit.ks_d),
            "r2_loglog": json_num(fit.r2_loglog),
        }),
        None => Value::Null,
    };
    let thresholds = match &report.thresholds {
        Some(t) => json!({
            "ks_d_max": json_num(t.ks_d_max),
            "r2_min": json_num(t.r2_min),
        }),
        None => Value::Null,
    };
    let value = json!({
        "metric_name": report.metric_name,
        "n": report.n,
        "summary": summary_stats_json(&report.summary),
        "powerlaw": powerlaw,
        "lognormal": lognormal,
        "verdict": report.verdict.as_str(),
        "thresholds": thresholds,
    });
    let mut out = serde_json::to_string_pretty(&value).expect("json");
    out.push('\n');
    out
}

pub fn parse_fit_report(text: &str) -> Result<FitReport, ReportError> {
    serde_json::from_str(text).map_err(|err| ReportError::Malformed {
        line: err.line(),
        detail: err.to_string(),
    })
}

/// Tab-separated CCDF export, ascending in x. Points with x ≤ 0 cannot be
/// drawn in log-log space and are omitted; the count of omitted points is
/// returned.
pub fn ccdf_tsv(ccdf: &EmpiricalCcdf) -> (String, usize) {
    let mut out = String::new();
    let mut skipped = 0;
    for &(x, g) in ccdf.points() {
        if x <= 0.0 {
            skipped += 1;
            continue;
        }
        out.push_str(&fmt_sig(x));
        out.push('\t');
        out.push_str(&fmt_sig(g));
        out.push('\n');
    }
    (out, skipped)
}

/// Path of the JSON mirror emitted alongside a text output: the extension
/// is replaced with `json`, or `.json` is appended when the path already
/// ends in `.json`.
pub fn json_mirror_path(path: &std::path::Path) -> std::path::PathBuf {
    let mirror = path.with_extension("json");
    if mirror == path {
        let mut name = path.as_os_str().to_owned();
        name.push(".json");
        std::path::PathBuf::from(name)
    } else {
        mirror
    }
}

pub fn parse_ccdf_tsv(text: &str) -> Result<Vec<(f64, f64)>, ReportError> {
    let mut points = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let mut cells = line.split('\t');
        let parse = |cell: Option<&str>| -> Result<f64, ReportError> {
            cell.and_then(|c| c.trim().parse::<f64>().ok())
                .ok_or(ReportError::Malformed {
                    line: lineno,
                    detail: format!("expected `x<TAB>g`, got {line:?}"),
                })
        };
        let x = parse(cells.next())?;
        let g = parse(cells.next())?;
        points.push((x, g));
    }
    if points.is_empty() {
        return Err(ReportError::EmptyCcdf);
    }
    Ok(points)
}

/// The preconditions of [`fit_powerlaw`], re-exported default.
pub use crate::distfit::DEFAULT_N_MIN;
