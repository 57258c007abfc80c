//! Pipeline orchestration for the `flowbalance` binary.
//!
//! Everything the binary does lives here so integration tests can drive the
//! stages in-process as well as through the executable. Stages communicate
//! only through files; a failed stage leaves the artifacts written so far in
//! place next to a `FAILED` marker naming the stage.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use flowbalance::bistochastic::{
    sinkhorn_knopp, squared_norm_bistochastize, ConvergenceReport, SquaredNormVariant,
    DEFAULT_SK_TOL, DEFAULT_SQNORM_TOL,
};
use flowbalance::flowmatrix::{
    correlation, load_flows, matrix_stats, FlowMatrix, DEFAULT_NONZERO_THRESHOLD,
};
use flowbalance::graphcluster::{
    census_to_json, component_census, cosmopolitan_ranking, cut_dendrogram,
    strong_component_hierarchy, strong_components, threshold_digraph, unit_entry_digraph,
    weak_components, Partition,
};
use flowbalance::io;
use flowbalance::spectral::{leading_eigenvalues, SpectrumReport};
use flowbalance::Error;

/// Failure classified by exit code: 2 invalid input, 3 convergence failure
/// (only raised under `--strict`), 4 internal error.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Convergence(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Convergence(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "invalid input: {m}"),
            CliError::Convergence(m) => write!(f, "convergence failure: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Library errors raised while reading or interpreting user data.
fn input_err(e: Error) -> CliError {
    CliError::Input(e.to_string())
}

/// Library errors raised while producing outputs; user data is no longer
/// the suspect at that point.
fn internal_err(e: Error) -> CliError {
    CliError::Internal(e.to_string())
}

fn write_json(path: &Path, value: &serde_json::Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Internal(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text)
        .map_err(|e| CliError::Internal(format!("writing {}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Sk,
    Sqnorm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Dykstra,
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Everything `pipeline` needs. Subcommands reuse the relevant subsets.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub flows: PathBuf,
    pub labels: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub method: Method,
    pub variant: Variant,
    pub tol: Option<f64>,
    pub max_iter: u64,
    pub unit_tolerance: f64,
    pub cut: Option<f64>,
    pub k: usize,
    pub strict: bool,
    pub format: Format,
}

impl PipelineConfig {
    pub fn effective_tol(&self) -> f64 {
        self.tol.unwrap_or(match self.method {
            Method::Sk => DEFAULT_SK_TOL,
            Method::Sqnorm => DEFAULT_SQNORM_TOL,
        })
    }
}

/// Outcome of `validate_inputs`: issues are reported, not thrown.
#[derive(Debug, Default)]
pub struct ValidationReport {
    pub issues: Vec<String>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.issues.is_empty()
    }

    fn check(&mut self, what: impl FnOnce() -> Result<(), String>) {
        if let Err(msg) = what() {
            self.issues.push(msg);
        }
    }
}

/// Checks the flow CSV schema, optional label file, and tolerance signs
/// without mutating anything.
pub fn validate_inputs(config: &PipelineConfig) -> ValidationReport {
    let mut report = ValidationReport::default();
    report.check(|| {
        if config.flows.exists() {
            Ok(())
        } else {
            Err(format!("flow file {} does not exist", config.flows.display()))
        }
    });
    if config.flows.exists() {
        report.check(|| {
            io::read_flow_csv(&config.flows)
                .map(|_| ())
                .map_err(|e| e.to_string())
        });
    }
    if let Some(labels) = &config.labels {
        report.check(|| {
            if labels.exists() {
                io::read_labels(labels).map(|_| ()).map_err(|e| e.to_string())
            } else {
                Err(format!("label file {} does not exist", labels.display()))
            }
        });
    }
    report.check(|| {
        let tol = config.effective_tol();
        if tol > 0.0 {
            Ok(())
        } else {
            Err(format!("tolerance must be positive, got {tol}"))
        }
    });
    report.check(|| {
        if config.unit_tolerance >= 0.0 {
            Ok(())
        } else {
            Err(format!(
                "unit tolerance must be non-negative, got {}",
                config.unit_tolerance
            ))
        }
    });
    report
}

/// Reads a flow CSV (plus optional label file) into a matrix.
pub fn ingest_matrix(flows: &Path, labels: Option<&Path>) -> CliResult<FlowMatrix> {
    let records = io::read_flow_csv(flows).map_err(input_err)?;
    let labels = match labels {
        Some(path) => Some(io::read_labels(path).map_err(input_err)?),
        None => None,
    };
    load_flows(&records, labels).map_err(input_err)
}

pub fn cmd_ingest(flows: &Path, labels: Option<&Path>, out: &Path) -> CliResult<()> {
    let m = ingest_matrix(flows, labels)?;
    io::write_matrix_auto(&m, out).map_err(internal_err)
}

pub struct BalanceOutcome {
    pub balanced: FlowMatrix,
    pub report: ConvergenceReport,
}

pub fn balance_matrix(
    m: &FlowMatrix,
    method: Method,
    variant: Variant,
    tol: f64,
    max_iter: u64,
) -> CliResult<BalanceOutcome> {
    let (balanced, report) = match method {
        Method::Sk => sinkhorn_knopp(m, tol, max_iter).map_err(input_err)?,
        Method::Sqnorm => {
            let v = match variant {
                Variant::Dykstra => SquaredNormVariant::Dykstra,
                Variant::Plain => SquaredNormVariant::PlainAlternation,
            };
            squared_norm_bistochastize(m, tol, max_iter, v).map_err(input_err)?
        }
    };
    Ok(BalanceOutcome { balanced, report })
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_balance(
    matrix_in: &Path,
    out: &Path,
    method: Method,
    variant: Variant,
    tol: Option<f64>,
    max_iter: u64,
    report_path: Option<&Path>,
    strict: bool,
) -> CliResult<()> {
    let m = io::read_matrix_auto(matrix_in).map_err(input_err)?;
    let tol = tol.unwrap_or(match method {
        Method::Sk => DEFAULT_SK_TOL,
        Method::Sqnorm => DEFAULT_SQNORM_TOL,
    });
    let outcome = balance_matrix(&m, method, variant, tol, max_iter)?;
    io::write_matrix_auto(&outcome.balanced, out).map_err(internal_err)?;
    if let Some(path) = report_path {
        let value = serde_json::to_value(&outcome.report)
            .map_err(|e| CliError::Internal(e.to_string()))?;
        write_json(path, &value)?;
    }
    if strict && !outcome.report.converged {
        return Err(CliError::Convergence(format!(
            "stopped after {} iterations with max sum deviation {:.3e}",
            outcome.report.iterations, outcome.report.max_sum_deviation
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterMode {
    Hierarchy,
    UnitDigraph,
}

pub fn cmd_cluster(
    matrix: &Path,
    mode: ClusterMode,
    unit_tolerance: f64,
    cut: Option<f64>,
    out_dendrogram: Option<&Path>,
    out_census: Option<&Path>,
) -> CliResult<()> {
    let m = io::read_matrix_auto(matrix).map_err(input_err)?;
    match mode {
        ClusterMode::Hierarchy => {
            let dend = strong_component_hierarchy(&m);
            if let Some(path) = out_dendrogram {
                let mut doc = dend.to_json();
                if let Some(t) = cut {
                    let p = cut_dendrogram(&dend, t);
                    doc["cut"] = serde_json::json!({
                        "threshold": t,
                        "clusters": partition_code_lists(&p, &m),
                    });
                }
                write_json(path, &doc)?;
                let newick = path.with_extension("newick");
                fs::write(&newick, dend.to_newick())
                    .map_err(|e| CliError::Internal(format!("writing {}: {e}", newick.display())))?;
            }
            if let Some(path) = out_census {
                let ranking: Vec<serde_json::Value> = cosmopolitan_ranking(&dend)
                    .into_iter()
                    .map(|(code, level)| serde_json::json!({"code": code, "first_merge_level": level}))
                    .collect();
                write_json(path, &serde_json::json!({ "cosmopolitan_ranking": ranking }))?;
            }
            Ok(())
        }
        ClusterMode::UnitDigraph => {
            let census = unit_digraph_censuses(&m, unit_tolerance)?;
            if let Some(path) = out_census {
                write_json(path, &census)?;
            }
            Ok(())
        }
    }
}

fn partition_code_lists(p: &Partition, m: &FlowMatrix) -> serde_json::Value {
    let lists: Vec<serde_json::Value> = p
        .components()
        .values()
        .map(|members| {
            serde_json::Value::Array(
                members
                    .iter()
                    .map(|&v| serde_json::Value::String(m.labels()[v].code().to_string()))
                    .collect(),
            )
        })
        .collect();
    serde_json::Value::Array(lists)
}

/// Strong and weak censuses of the unit-entry digraph, as one document.
pub fn unit_digraph_censuses(m: &FlowMatrix, unit_tolerance: f64) -> CliResult<serde_json::Value> {
    let g = unit_entry_digraph(m, unit_tolerance);
    let strong = strong_components(&g);
    let weak = weak_components(&g);
    let census = component_census(&strong, &g, m, unit_tolerance).map_err(internal_err)?;
    let strong_doc = census_to_json(&census, &strong, m);
    let mut weak_hist = std::collections::BTreeMap::<String, usize>::new();
    for size in weak.sizes() {
        *weak_hist.entry(size.to_string()).or_insert(0) += 1;
    }
    Ok(serde_json::json!({
        "unit_tolerance": unit_tolerance,
        "unit_arc_count": g.arcs().len(),
        "strong": strong_doc,
        "weak": {
            "component_count": weak.len(),
            "size_histogram": weak_hist,
            "largest": weak.sizes().into_iter().max().unwrap_or(0),
        },
    }))
}

pub fn cmd_census(
    matrix: &Path,
    unit_tolerance: f64,
    threshold: Option<f64>,
    out: Option<&Path>,
    format: Format,
) -> CliResult<()> {
    let m = io::read_matrix_auto(matrix).map_err(input_err)?;
    let doc = match threshold {
        None => unit_digraph_censuses(&m, unit_tolerance)?,
        Some(t) => {
            let g = threshold_digraph(&m, t);
            let strong = strong_components(&g);
            let census = component_census(&strong, &g, &m, unit_tolerance).map_err(input_err)?;
            let mut doc = census_to_json(&census, &strong, &m);
            doc["threshold"] = serde_json::json!(t);
            doc
        }
    };
    emit(&doc, out, format, census_csv)
}

fn census_csv(doc: &serde_json::Value) -> String {
    let mut out = String::from("size,count\n");
    let hist = doc
        .pointer("/strong/size_histogram")
        .or_else(|| doc.get("size_histogram"))
        .and_then(|v| v.as_object());
    if let Some(map) = hist {
        for (size, count) in map {
            out.push_str(&format!("{size},{count}\n"));
        }
    }
    out
}

pub fn spectrum_json(report: &SpectrumReport) -> serde_json::Value {
    let eigenvalues: Vec<serde_json::Value> = report
        .eigenvalues
        .iter()
        .zip(&report.residuals)
        .map(|(e, r)| serde_json::json!({"re": e.re, "im": e.im, "residual": r}))
        .collect();
    serde_json::json!({ "eigenvalues": eigenvalues, "k": report.k })
}

fn spectrum_csv(doc: &serde_json::Value) -> String {
    let mut out = String::from("re,im,residual\n");
    if let Some(rows) = doc["eigenvalues"].as_array() {
        for row in rows {
            out.push_str(&format!(
                "{},{},{}\n",
                row["re"], row["im"], row["residual"]
            ));
        }
    }
    out
}

pub fn cmd_spectrum(
    matrix: &Path,
    k: usize,
    out: Option<&Path>,
    format: Format,
    strict: bool,
) -> CliResult<()> {
    let m = io::read_matrix_auto(matrix).map_err(input_err)?;
    let doc = match leading_eigenvalues(&m, k) {
        Ok(report) => spectrum_json(&report),
        Err(Error::SpectralNotConverged { partial }) => {
            if strict {
                return Err(CliError::Convergence(format!(
                    "spectrum residuals missed tolerance for k={}",
                    partial.k
                )));
            }
            let mut doc = spectrum_json(&partial);
            doc["converged"] = serde_json::json!(false);
            doc
        }
        Err(e) => return Err(input_err(e)),
    };
    emit(&doc, out, format, spectrum_csv)
}

fn emit(
    doc: &serde_json::Value,
    out: Option<&Path>,
    format: Format,
    to_csv: fn(&serde_json::Value) -> String,
) -> CliResult<()> {
    let text = match format {
        Format::Json => {
            let mut t = serde_json::to_string_pretty(doc)
                .map_err(|e| CliError::Internal(e.to_string()))?;
            t.push('\n');
            t
        }
        Format::Csv => to_csv(doc),
    };
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Internal(format!("writing {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// One stage of `pipeline`, tagged for the FAILED marker and diagnostics.
fn stage<T>(
    out_dir: &Path,
    name: &str,
    body: impl FnOnce() -> CliResult<T>,
) -> CliResult<T> {
    body().map_err(|e| {
        let marker = out_dir.join("FAILED");
        let _ = fs::write(&marker, format!("stage: {name}\n{e}\n"));
        match e {
            CliError::Input(m) => CliError::Input(format!("[{name}] {m}")),
            CliError::Convergence(m) => CliError::Convergence(format!("[{name}] {m}")),
            CliError::Internal(m) => CliError::Internal(format!("[{name}] {m}")),
        }
    })
}

/// Artifact file names produced by `pipeline` under its output directory.
pub mod artifacts {
    pub const RAW_MATRIX: &str = "raw_matrix.csv";
    pub const BALANCED_CSV: &str = "balanced_matrix.csv";
    pub const BALANCED_BIN: &str = "balanced_matrix.bstm";
    pub const CONVERGENCE: &str = "convergence_report.json";
    pub const DENDROGRAM: &str = "dendrogram.json";
    pub const NEWICK: &str = "dendrogram.newick";
    pub const UNIT_CENSUS: &str = "unit_census.json";
    pub const SPECTRUM: &str = "spectrum.json";
    pub const SUMMARY: &str = "summary.json";
    pub const FAILED: &str = "FAILED";
}

/// Ingest, balance, cluster, census, spectrum, report. Artifacts land in
/// `config.out_dir`; any stage failure leaves a FAILED marker naming the
/// stage and keeps the artifacts already written.
pub fn run_pipeline(config: &PipelineConfig) -> CliResult<serde_json::Value> {
    fs::create_dir_all(&config.out_dir)
        .map_err(|e| CliError::Input(format!("creating {}: {e}", config.out_dir.display())))?;
    let dir = &config.out_dir;
    // A marker from a previous failed run must not outlive a clean one.
    let _ = fs::remove_file(dir.join(artifacts::FAILED));

    let report = validate_inputs(config);
    if !report.ok() {
        return stage(dir, "validate", || {
            Err(CliError::Input(report.issues.join("; ")))
        });
    }

    let raw = stage(dir, "ingest", || {
        let m = ingest_matrix(&config.flows, config.labels.as_deref())?;
        io::write_matrix_csv(&m, &dir.join(artifacts::RAW_MATRIX)).map_err(internal_err)?;
        Ok(m)
    })?;

    let outcome = stage(dir, "balance", || {
        let outcome = balance_matrix(
            &raw,
            config.method,
            config.variant,
            config.effective_tol(),
            config.max_iter,
        )?;
        io::write_matrix_csv(&outcome.balanced, &dir.join(artifacts::BALANCED_CSV))
            .map_err(internal_err)?;
        io::write_matrix_bin(&outcome.balanced, &dir.join(artifacts::BALANCED_BIN))
            .map_err(internal_err)?;
        let report_value = serde_json::to_value(&outcome.report)
            .map_err(|e| CliError::Internal(e.to_string()))?;
        write_json(&dir.join(artifacts::CONVERGENCE), &report_value)?;
        if config.strict && !outcome.report.converged {
            return Err(CliError::Convergence(format!(
                "stopped after {} iterations with max sum deviation {:.3e}",
                outcome.report.iterations, outcome.report.max_sum_deviation
            )));
        }
        Ok(outcome)
    })?;
    let balanced = &outcome.balanced;

    let merge_level_count = stage(dir, "cluster", || {
        let dend = strong_component_hierarchy(balanced);
        let mut doc = dend.to_json();
        if let Some(t) = config.cut {
            let p = cut_dendrogram(&dend, t);
            doc["cut"] = serde_json::json!({
                "threshold": t,
                "clusters": partition_code_lists(&p, balanced),
            });
        }
        write_json(&dir.join(artifacts::DENDROGRAM), &doc)?;
        fs::write(dir.join(artifacts::NEWICK), dend.to_newick())
            .map_err(|e| CliError::Internal(format!("writing newick: {e}")))?;
        Ok(dend.merges().len())
    })?;

    let census_doc = stage(dir, "census", || {
        let doc = unit_digraph_censuses(balanced, config.unit_tolerance)?;
        write_json(&dir.join(artifacts::UNIT_CENSUS), &doc)?;
        Ok(doc)
    })?;

    let spectrum_doc = stage(dir, "spectrum", || {
        let k = config.k.min(balanced.n()).max(1);
        match leading_eigenvalues(balanced, k) {
            Ok(report) => {
                let doc = spectrum_json(&report);
                write_json(&dir.join(artifacts::SPECTRUM), &doc)?;
                Ok(doc)
            }
            Err(Error::SpectralNotConverged { partial }) => {
                let mut doc = spectrum_json(&partial);
                doc["converged"] = serde_json::json!(false);
                write_json(&dir.join(artifacts::SPECTRUM), &doc)?;
                if config.strict {
                    Err(CliError::Convergence(
                        "spectrum residuals missed tolerance".to_string(),
                    ))
                } else {
                    Ok(doc)
                }
            }
            Err(e) => Err(input_err(e)),
        }
    })?;

    let summary = stage(dir, "report", || {
        let summary = build_summary(
            &raw,
            balanced,
            &outcome.report,
            &census_doc,
            &spectrum_doc,
            config,
        )?;
        debug_assert_eq!(
            summary["merge_level_count"],
            serde_json::json!(merge_level_count)
        );
        write_json(&dir.join(artifacts::SUMMARY), &summary)?;
        Ok(summary)
    })?;

    Ok(summary)
}

fn build_summary(
    raw: &FlowMatrix,
    balanced: &FlowMatrix,
    convergence: &ConvergenceReport,
    census_doc: &serde_json::Value,
    spectrum_doc: &serde_json::Value,
    config: &PipelineConfig,
) -> CliResult<serde_json::Value> {
    let raw_stats =
        matrix_stats(raw, DEFAULT_NONZERO_THRESHOLD, config.unit_tolerance).map_err(internal_err)?;
    let bal_stats = matrix_stats(balanced, DEFAULT_NONZERO_THRESHOLD, config.unit_tolerance)
        .map_err(internal_err)?;
    let corr = match correlation(raw, balanced) {
        Ok(c) => serde_json::json!(c),
        Err(Error::UndefinedCorrelation { .. }) => serde_json::Value::Null,
        Err(e) => return Err(internal_err(e)),
    };
    let dend = strong_component_hierarchy(balanced);
    let cosmopolitan: Vec<serde_json::Value> = cosmopolitan_ranking(&dend)
        .into_iter()
        .take(10)
        .map(|(code, level)| serde_json::json!({"code": code, "first_merge_level": level}))
        .collect();
    let convergence_value =
        serde_json::to_value(convergence).map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(serde_json::json!({
        "n": raw.n(),
        "raw": {
            "nonzero_count": raw_stats.nonzero_count,
            "sparsity_fraction": raw_stats.sparsity_fraction,
            "diag_sum": raw_stats.diag_sum,
        },
        "balanced": {
            "unit_entry_count": bal_stats.unit_entry_count,
            "nonzero_count": bal_stats.nonzero_count,
            "max_sum_deviation": balanced.dense().doubly_stochastic_deviation(),
        },
        "correlation_raw_vs_balanced": corr,
        "convergence": convergence_value,
        "strong": census_doc["strong"],
        "weak": census_doc["weak"],
        "merge_level_count": dend.merges().len(),
        "cosmopolitan_top10": cosmopolitan,
        "spectrum": spectrum_doc,
    }))
}

/// Recomputes the summary from the artifacts already on disk; the `report`
/// subcommand and the round-trip consistency test both go through here.
pub fn cmd_report(dir: &Path, out: Option<&Path>, config: &PipelineConfig) -> CliResult<()> {
    let raw = io::read_matrix_csv(&dir.join(artifacts::RAW_MATRIX)).map_err(input_err)?;
    let balanced = io::read_matrix_csv(&dir.join(artifacts::BALANCED_CSV)).map_err(input_err)?;
    let convergence: ConvergenceReport = serde_json::from_str(
        &fs::read_to_string(dir.join(artifacts::CONVERGENCE))
            .map_err(|e| CliError::Input(format!("reading convergence report: {e}")))?,
    )
    .map_err(|e| CliError::Input(format!("parsing convergence report: {e}")))?;
    let census_doc = unit_digraph_censuses(&balanced, config.unit_tolerance)?;
    let spectrum_doc = {
        let text = fs::read_to_string(dir.join(artifacts::SPECTRUM))
            .map_err(|e| CliError::Input(format!("reading spectrum: {e}")))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("parsing spectrum: {e}")))?
    };
    let summary = build_summary(
        &raw,
        &balanced,
        &convergence,
        &census_doc,
        &spectrum_doc,
        config,
    )?;
    emit(&summary, out, config.format, |_| {
        String::from("summary is json-only\n")
    })
}

/// Applies `--threads`: a fixed-size global rayon pool. The numeric results
/// do not depend on the thread count; this only bounds parallelism.
pub fn configure_threads(threads: Option<usize>) -> CliResult<()> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Input("--threads must be at least 1".to_string()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;
    }
    Ok(())
}
