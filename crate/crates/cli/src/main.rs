use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use flowbalance::bistochastic::DEFAULT_MAX_ITER;
use flowbalance::flowmatrix::DEFAULT_UNIT_TOLERANCE;
use flowbalance_cli::{
    cmd_balance, cmd_census, cmd_cluster, cmd_ingest, cmd_report, cmd_spectrum,
    configure_threads, run_pipeline, CliResult, ClusterMode, Format, Method, PipelineConfig,
    Variant,
};

#[derive(Parser)]
#[command(
    name = "flowbalance",
    about = "Bi-stochastic balancing and clustering of flow matrices",
    version
)]
struct Cli {
    /// Size of the worker thread pool (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// RNG seed. Accepted for reproducible test harnesses; the production
    /// pipeline is deterministic and does not consume randomness.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output format for reports printed to stdout or written by
    /// census/spectrum/report.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    /// Kullback-Leibler row/column scaling.
    Sk,
    /// Euclidean projection onto the doubly stochastic polytope.
    Sqnorm,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Sk => Method::Sk,
            MethodArg::Sqnorm => Method::Sqnorm,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    /// Alternating projections with Dykstra's correction (converges to the
    /// true projection).
    Dykstra,
    /// Uncorrected alternating projections (kept for comparison runs).
    Plain,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Dykstra => Variant::Dykstra,
            VariantArg::Plain => Variant::Plain,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    /// Descending-threshold strong-component dendrogram.
    Hierarchy,
    /// Strong/weak census of the unit-entry digraph.
    UnitDigraph,
}

#[derive(Args)]
struct BalanceFlags {
    /// Balancing method.
    #[arg(long, value_enum, default_value_t = MethodArg::Sk)]
    method: MethodArg,

    /// Projection variant for --method sqnorm.
    #[arg(long, value_enum, default_value_t = VariantArg::Dykstra)]
    variant: VariantArg,

    /// Convergence tolerance (default depends on the method).
    #[arg(long)]
    tol: Option<f64>,

    /// Iteration cap.
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: u64,

    /// Exit 3 when the iteration stops without converging.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Read a flow CSV (origin,dest,flow) into a matrix file.
    Ingest {
        /// Flow CSV path.
        flows: PathBuf,
        /// Optional label file fixing the region order.
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Output matrix path (.csv or .bstm).
        #[arg(long)]
        out: PathBuf,
    },
    /// Balance a matrix to doubly stochastic form.
    Balance {
        /// Input matrix (.csv or .bstm).
        matrix: PathBuf,
        /// Output matrix path (.csv or .bstm).
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        flags: BalanceFlags,
        /// Also write the convergence report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Cluster a balanced matrix.
    Cluster {
        /// Input matrix (.csv or .bstm).
        #[arg(long)]
        matrix: PathBuf,
        /// What to compute.
        #[arg(long, value_enum, default_value_t = ModeArg::Hierarchy)]
        mode: ModeArg,
        /// Tolerance for counting an entry as a unit entry.
        #[arg(long, default_value_t = DEFAULT_UNIT_TOLERANCE)]
        unit_tol: f64,
        /// Also report the partition at this threshold (hierarchy mode).
        #[arg(long)]
        cut: Option<f64>,
        /// Dendrogram JSON path (hierarchy mode; a .newick sibling is
        /// written next to it).
        #[arg(long)]
        out_dendrogram: Option<PathBuf>,
        /// Census JSON path.
        #[arg(long)]
        out_census: Option<PathBuf>,
    },
    /// Strong/weak component census of a matrix's unit-entry digraph, or of
    /// the digraph of entries above --threshold.
    Census {
        /// Input matrix (.csv or .bstm).
        #[arg(long)]
        matrix: PathBuf,
        /// Tolerance for counting an entry as a unit entry.
        #[arg(long, default_value_t = DEFAULT_UNIT_TOLERANCE)]
        unit_tol: f64,
        /// Use arcs with weight > threshold instead of unit entries.
        #[arg(long)]
        threshold: Option<f64>,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Leading eigenvalues of a matrix.
    Spectrum {
        /// Input matrix (.csv or .bstm).
        #[arg(long)]
        matrix: PathBuf,
        /// How many leading eigenvalues to report.
        #[arg(short, default_value_t = 6)]
        k: usize,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exit 3 when residuals miss tolerance.
        #[arg(long)]
        strict: bool,
    },
    /// Recompute the summary from a pipeline output directory.
    Report {
        /// Pipeline output directory.
        dir: PathBuf,
        /// Tolerance for counting an entry as a unit entry.
        #[arg(long, default_value_t = DEFAULT_UNIT_TOLERANCE)]
        unit_tol: f64,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run ingest -> balance -> cluster -> census -> spectrum -> report.
    Pipeline {
        /// Flow CSV path.
        flows: PathBuf,
        /// Optional label file fixing the region order.
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Directory for all artifacts.
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        flags: BalanceFlags,
        /// Tolerance for counting an entry as a unit entry.
        #[arg(long, default_value_t = DEFAULT_UNIT_TOLERANCE)]
        unit_tol: f64,
        /// Also report the partition at this threshold in the dendrogram.
        #[arg(long)]
        cut: Option<f64>,
        /// How many leading eigenvalues to report (clamped to n).
        #[arg(short, default_value_t = 6)]
        k: usize,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads(cli.threads)?;
    let format: Format = cli.format.into();
    match cli.command {
        Command::Ingest { flows, labels, out } => cmd_ingest(&flows, labels.as_deref(), &out),
        Command::Balance {
            matrix,
            out,
            flags,
            report,
        } => cmd_balance(
            &matrix,
            &out,
            flags.method.into(),
            flags.variant.into(),
            flags.tol,
            flags.max_iter,
            report.as_deref(),
            flags.strict,
        ),
        Command::Cluster {
            matrix,
            mode,
            unit_tol,
            cut,
            out_dendrogram,
            out_census,
        } => cmd_cluster(
            &matrix,
            match mode {
                ModeArg::Hierarchy => ClusterMode::Hierarchy,
                ModeArg::UnitDigraph => ClusterMode::UnitDigraph,
            },
            unit_tol,
            cut,
            out_dendrogram.as_deref(),
            out_census.as_deref(),
        ),
        Command::Census {
            matrix,
            unit_tol,
            threshold,
            out,
        } => cmd_census(&matrix, unit_tol, threshold, out.as_deref(), format),
        Command::Spectrum {
            matrix,
            k,
            out,
            strict,
        } => cmd_spectrum(&matrix, k, out.as_deref(), format, strict),
        Command::Report { dir, unit_tol, out } => {
            let config = PipelineConfig {
                flows: dir.clone(),
                labels: None,
                out_dir: dir.clone(),
                method: Method::Sk,
                variant: Variant::Dykstra,
                tol: None,
                max_iter: DEFAULT_MAX_ITER,
                unit_tolerance: unit_tol,
                cut: None,
                k: 6,
                strict: false,
                format,
            };
            cmd_report(&dir, out.as_deref(), &config)
        }
        Command::Pipeline {
            flows,
            labels,
            out_dir,
            flags,
            unit_tol,
            cut,
            k,
        } => {
            let config = PipelineConfig {
                flows,
                labels,
                out_dir,
                method: flags.method.into(),
                variant: flags.variant.into(),
                tol: flags.tol,
                max_iter: flags.max_iter,
                unit_tolerance: unit_tol,
                cut,
                k,
                strict: flags.strict,
                format,
            };
            run_pipeline(&config).map(|_| ())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("flowbalance: {e}");
            ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(4))
        }
    }
}
