use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qpath_core::baselines::BenchRecord;
use qpath_core::grid::{build_grid, select_m};
use qpath_core::integrate::{bench, RunConfig};
use qpath_core::oracle::{Coefficients, NamedCoefficients};
use qpath_core::qae::{qsum, QaeMode, QaeResult, QsumConfig, SumSource};
use qpath_core::truncate::{dimension_by_tail, dimension_scaled, dimension_upper};
use qpath_core::{EigenSpectrum, Integrand, Method, SmoothnessClass, SummandOracle};

#[derive(Parser)]
#[command(name = "qpath", version, about = "Gaussian path integration with simulated quantum summation")]
struct Cli {
    /// Seed for all sampling; overrides the seed in a config file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Write the result to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format. Defaults: text for spectrum and dim, csv for bench,
    /// json otherwise.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues, partial traces and tail bounds of a covariance spectrum.
    Spectrum(SpectrumCmd),
    /// Truncation dimension for an integrand class.
    Dim(DimCmd),
    /// Node count, extents and worst-case error bound of a product grid.
    GridInfo(GridInfoCmd),
    /// Quantum summation of a small list of numbers.
    QaeDemo(QaeDemoCmd),
    /// Run the full pipeline from a JSON config.
    Integrate(IntegrateCmd),
    /// Resource and error sweep over several accuracies, one CSV row each.
    Bench(BenchCmd),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SpecKind {
    Wiener,
    PowerLaw,
}

#[derive(Args)]
struct SpecArgs {
    /// Covariance spectrum.
    #[arg(long = "spec", value_enum, default_value = "wiener")]
    kind: SpecKind,
    /// Power-law scale a in λ_j = a·j^(-k).
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Power-law exponent k > 1.
    #[arg(long, default_value_t = 2.0)]
    k: f64,
}

impl SpecArgs {
    fn spectrum(&self) -> Result<EigenSpectrum, CliError> {
        Ok(match self.kind {
            SpecKind::Wiener => EigenSpectrum::Wiener,
            SpecKind::PowerLaw => EigenSpectrum::power_law(self.a, self.k)?,
        })
    }
}

#[derive(Args)]
struct ClassArgs {
    /// Smoothness r ≥ 1.
    #[arg(long, default_value_t = 1)]
    r: u32,
    #[arg(long = "K0", default_value_t = 1.0)]
    k0: f64,
    #[arg(long = "K1", default_value_t = 1.0)]
    k1: f64,
    /// Used when r ≥ 2.
    #[arg(long = "K2", default_value_t = 1.0)]
    k2: f64,
}

impl ClassArgs {
    fn class(&self) -> Result<SmoothnessClass, CliError> {
        let mut k = vec![self.k0, self.k1, self.k2];
        k.resize(self.r as usize + 1, 1.0);
        Ok(SmoothnessClass::new(self.r, k)?)
    }
}

#[derive(Args)]
struct SpectrumCmd {
    #[command(flatten)]
    spec: SpecArgs,
    /// Full trace Σλ_j.
    #[arg(long)]
    trace: bool,
    /// Eigenvalue λ_j (1-based); may be repeated.
    #[arg(long = "eigenvalue", value_name = "J")]
    eigenvalues: Vec<u64>,
    /// Partial trace of the first D eigenvalues.
    #[arg(long, value_name = "D")]
    partial: Option<u64>,
    /// Upper bound on Σ_{j>D} λ_j.
    #[arg(long, value_name = "D")]
    tail: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DimMethod {
    /// Closed-form upper bound.
    Upper,
    /// Smallest d meeting the tail condition.
    Tail,
    /// Wiener bound with K0 folded in.
    Scaled,
}

#[derive(Args)]
struct DimCmd {
    #[command(flatten)]
    spec: SpecArgs,
    #[command(flatten)]
    class: ClassArgs,
    #[arg(long)]
    eps: f64,
    #[arg(long, value_enum, default_value = "upper")]
    method: DimMethod,
}

#[derive(Args)]
struct GridInfoCmd {
    #[command(flatten)]
    spec: SpecArgs,
    /// Number of eigencoordinates.
    #[arg(long)]
    d: usize,
    /// Odd nodes per axis; chosen from --eps-grid when absent.
    #[arg(long, conflicts_with = "eps_grid", required_unless_present = "eps_grid")]
    m: Option<u64>,
    /// Grid error target used to choose m.
    #[arg(long)]
    eps_grid: Option<f64>,
    #[arg(long = "K1", default_value_t = 1.0)]
    k1: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Statevector,
    Analytic,
}

#[derive(Args)]
struct QaeDemoCmd {
    /// Number of summands; the preset is y_i = -1 for i ≡ 1 (mod 4), else 1.
    #[arg(long)]
    n: Option<u64>,
    /// Comma-separated summands in [-1, 1]; replaces the preset.
    #[arg(long, allow_hyphen_values = true)]
    values: Option<String>,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long, value_enum, default_value = "statevector")]
    mode: ModeArg,
    /// Odd number of repetitions; the estimate is their median.
    #[arg(long, default_value_t = 1)]
    reps: u32,
}

#[derive(Args)]
struct IntegrateCmd {
    /// Pipeline config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Add wall-clock time to the report (output is then not reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct BenchCmd {
    /// Config supplying spectrum, class and integrand; defaults to the
    /// Wiener measure, r = 2, unit constants and cos of the path mean.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Accuracies to sweep.
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05,0.025")]
    eps: Vec<f64>,
    /// worst_case_classical, monte_carlo, quantum_statevector or quantum_analytic.
    #[arg(long)]
    method: Option<Method>,
    /// Relative weights of the truncation, grid and summation budgets.
    #[arg(long, value_delimiter = ',', num_args = 3, default_value = "1,1,2")]
    split: Vec<f64>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] qpath_core::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Io { .. } => "io",
            CliError::Csv(_) => "csv",
            CliError::Usage(_) => "usage",
        }
    }

    fn exit_code(&self) -> u8 {
        use qpath_core::Error as E;
        match self {
            CliError::Core(E::EnumerationCap { .. } | E::MemoryCap { .. } | E::GridOverflow { .. }) => 3,
            CliError::Core(E::BoundViolation { .. }) => 4,
            _ => 2,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn json<T: Serialize>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(qpath_core::Error::from)?;
    s.push('\n');
    Ok(s)
}

fn run_spectrum(cmd: &SpectrumCmd, format: Format) -> Result<String, CliError> {
    let spec = cmd.spec.spectrum()?;
    let mut rows: Vec<(String, f64)> = Vec::new();
    if cmd.trace || (cmd.eigenvalues.is_empty() && cmd.partial.is_none() && cmd.tail.is_none()) {
        rows.push(("trace".into(), spec.trace()));
    }
    for &j in &cmd.eigenvalues {
        if j == 0 {
            return Err(CliError::Usage("eigenvalue indices start at 1".into()));
        }
        rows.push((format!("eigenvalue_{j}"), spec.eigenvalue(j)));
    }
    if let Some(d) = cmd.partial {
        rows.push((format!("partial_trace_{d}"), spec.partial_trace(d)));
    }
    if let Some(d) = cmd.tail {
        rows.push((format!("tail_bound_{d}"), spec.tail_bound(d)));
    }
    Ok(match format {
        Format::Text => rows.iter().map(|(_, v)| format!("{v}\n")).collect(),
        Format::Csv => std::iter::once("quantity,value\n".to_string())
            .chain(rows.iter().map(|(k, v)| format!("{k},{v}\n")))
            .collect(),
        Format::Json => {
            let map: serde_json::Map<String, serde_json::Value> =
                rows.into_iter().map(|(k, v)| (k, serde_json::Value::from(v))).collect();
            json(&map)?
        }
    })
}

fn run_dim(cmd: &DimCmd, format: Format) -> Result<String, CliError> {
    let spec = cmd.spec.spectrum()?;
    let cls = cmd.class.class()?;
    let (d, name) = match cmd.method {
        DimMethod::Upper => (dimension_upper(&spec, &cls, cmd.eps)?, "upper"),
        DimMethod::Tail => (dimension_by_tail(&spec, &cls, cmd.eps)?, "tail"),
        DimMethod::Scaled => {
            if spec != EigenSpectrum::Wiener {
                return Err(CliError::Usage("--method scaled applies to --spec wiener only".into()));
            }
            (dimension_scaled(&cls, cls.k0(), cmd.eps)?, "scaled")
        }
    };
    Ok(match format {
        Format::Text => format!("{d}\n"),
        Format::Csv => format!("d,method,eps\n{d},{name},{}\n", cmd.eps),
        Format::Json => json(&serde_json::json!({ "d": d, "method": name, "eps": cmd.eps }))?,
    })
}

fn run_grid_info(cmd: &GridInfoCmd) -> Result<String, CliError> {
    let spec = cmd.spec.spectrum()?;
    let m = match (cmd.m, cmd.eps_grid) {
        (Some(m), _) => m,
        (None, Some(e)) => select_m(&spec, cmd.d, cmd.k1, e)?,
        (None, None) => unreachable!("clap requires one of --m, --eps-grid"),
    };
    let grid = build_grid(&spec, cmd.d, m)?;
    json(&grid.info(cmd.k1))
}

#[derive(Serialize)]
struct Demo {
    #[serde(flatten)]
    result: QaeResult,
    values: Vec<f64>,
    exact_mean: f64,
    error: f64,
}

fn run_qae_demo(cmd: &QaeDemoCmd, seed: u64) -> Result<String, CliError> {
    let values: Vec<f64> = match &cmd.values {
        Some(list) => {
            let v = list
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|e| CliError::Usage(format!("bad value {s:?}: {e}"))))
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(n) = cmd.n {
                if n as usize != v.len() {
                    return Err(CliError::Usage(format!("--n {n} but {} values given", v.len())));
                }
            }
            v
        }
        None => {
            let n = cmd.n.unwrap_or(4);
            (0..n).map(|i| if i % 4 == 1 { -1.0 } else { 1.0 }).collect()
        }
    };
    let oracle = SummandOracle::from_values(values.clone())?;
    let mode = match cmd.mode {
        ModeArg::Statevector => QaeMode::Statevector,
        ModeArg::Analytic => QaeMode::AnalyticDistribution,
    };
    let result = qsum(SumSource::Oracle(&oracle), &QsumConfig::new(cmd.delta, cmd.reps, mode, seed))?;
    let exact_mean = values.iter().sum::<f64>() / values.len() as f64;
    let error = (result.estimate - exact_mean).abs();
    json(&Demo {
        result,
        values,
        exact_mean,
        error,
    })
}

fn read_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    Ok(RunConfig::from_json(&text)?)
}

fn run_integrate(cmd: &IntegrateCmd, seed: Option<u64>) -> Result<String, CliError> {
    let mut cfg = read_config(&cmd.config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let start = Instant::now();
    let mut report = cfg.run()?;
    if cmd.timing {
        report.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    json(&report)
}

fn run_bench(cmd: &BenchCmd, seed: Option<u64>, format: Format) -> Result<String, CliError> {
    let (spec, cls, f, cfg_method, cfg_seed) = match &cmd.config {
        Some(path) => {
            let c = read_config(path)?;
            (c.spectrum, c.class, c.integrand, Some(c.method), c.seed)
        }
        None => (
            EigenSpectrum::Wiener,
            SmoothnessClass::new(2, vec![1.0, 1.0, 1.0])?,
            Integrand::cosine(Coefficients::Named(NamedCoefficients::WienerMean)),
            None,
            0,
        ),
    };
    let method = cmd.method.or(cfg_method).unwrap_or(Method::QuantumAnalytic);
    let split = (cmd.split[0], cmd.split[1], cmd.split[2]);
    if !(split.0 > 0.0 && split.1 > 0.0 && split.2 > 0.0) {
        return Err(CliError::Usage("--split weights must be positive".into()));
    }
    let rows = bench(&spec, &cls, &f, &cmd.eps, split, method, seed.unwrap_or(cfg_seed))?;
    match format {
        Format::Json => json(&rows),
        _ => bench_csv(&rows),
    }
}

fn bench_csv(rows: &[BenchRecord]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(BenchRecord::CSV_HEADER.split(','))?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn run(cli: &Cli) -> Result<String, CliError> {
    let seed = cli.seed;
    match &cli.command {
        Command::Spectrum(c) => run_spectrum(c, cli.format.unwrap_or(Format::Text)),
        Command::Dim(c) => run_dim(c, cli.format.unwrap_or(Format::Text)),
        Command::GridInfo(c) => run_grid_info(c),
        Command::QaeDemo(c) => run_qae_demo(c, seed.unwrap_or(0)),
        Command::Integrate(c) => run_integrate(c, seed),
        Command::Bench(c) => run_bench(c, seed, cli.format.unwrap_or(Format::Csv)),
    }
}

fn report(kind: &str, message: &str) {
    let line = serde_json::json!({ "error": kind, "message": message });
    eprintln!("{line}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("usage error");
            report("usage", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    let result = run(&cli).and_then(|text| match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(io_err(path)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(io_err(Path::new("<stdout>"))),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(e.kind(), &e.to_string());
            ExitCode::from(e.exit_code())
        }
    }
}
