use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use stcphase::lindblad::{polaron_residual, write_trajectory_csv};
use stcphase::sweep::{self, Format, RunConfig, SweepResult, SCHEMA_VERSION};
use stcphase::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_DIAGNOSTIC: u8 = 3;

/// Resonator-mediated two-qubit phase gate: fidelity, simulation and
/// noise-optimal operating points.
#[derive(Parser)]
#[command(name = "stcphase", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form operating point and analytic fidelity.
    Analytic(Common),
    /// Master-equation simulation at the configured point.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Write the noise-free state trajectory here (CSV).
        #[arg(long, value_name = "PATH")]
        trajectory: Option<PathBuf>,
    },
    /// Evaluate the Cartesian product of the configured sweep axes.
    Sweep(Common),
    /// Refine the closed-form optimum at the configured point.
    Optimize(Common),
}

#[derive(Args)]
struct Common {
    /// JSON config; every key is optional.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output file. Defaults to stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Defaults to the output file's extension, else csv.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Also run the master-equation check.
    #[arg(long)]
    numeric: bool,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads; all cores if omitted.
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn load(common: &Common) -> Result<RunConfig, Error> {
    let mut cfg = match &common.config {
        Some(p) => sweep::load_config(p).map_err(|e| match e {
            Error::Io { path, source } => Error::Config {
                path: "--config".into(),
                message: format!("cannot read {}: {source}", path.display()),
            },
            other => other,
        })?,
        None => RunConfig::default(),
    };
    if common.numeric {
        cfg.numeric = true;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn output_path(common: &Common, cfg: &RunConfig) -> Option<PathBuf> {
    common.out.clone().or_else(|| cfg.out.as_ref().map(PathBuf::from))
}

fn format_for(common: &Common, out: Option<&Path>) -> Format {
    match common.format {
        Some(FormatArg::Csv) => Format::Csv,
        Some(FormatArg::Json) => Format::Json,
        None if out.and_then(|p| p.extension()).is_some_and(|e| e == "json") => Format::Json,
        None => Format::Csv,
    }
}

fn emit(result: &SweepResult, common: &Common) -> Result<(), Error> {
    let out = output_path(common, &result.config);
    let format = format_for(common, out.as_deref());
    match out {
        Some(p) => sweep::emit_results(result, format, &p),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            sweep::write(result, format, &mut lock)?;
            lock.flush().map_err(|source| Error::Io {
                path: PathBuf::from("<stdout>"),
                source,
            })
        }
    }
}

fn single_point(cfg: RunConfig, common: &Common) -> Result<u8, Error> {
    let threads = common.jobs.unwrap_or(0);
    let pool = rayon_pool(threads)?;
    let row = pool.install(|| sweep::optimize_point(&cfg, vec![], cfg.seed));
    let code = match (&row.error, row.diagnostic_failure) {
        (None, _) => 0,
        (Some(e), true) => {
            eprintln!("error: {e}");
            EXIT_DIAGNOSTIC
        }
        (Some(e), false) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    };
    let result = SweepResult {
        schema_version: SCHEMA_VERSION,
        config: cfg,
        rows: vec![row],
    };
    emit(&result, common)?;
    Ok(code)
}

fn rayon_pool(threads: usize) -> Result<rayon::ThreadPool, Error> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config {
            path: "--jobs".into(),
            message: e.to_string(),
        })
}

fn write_trajectory(cfg: &RunConfig, path: &Path) -> Result<(), Error> {
    let eval = sweep::operating_point(cfg)?;
    let report = polaron_residual(&eval.params, &cfg.sim_options(), 10)?;
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io)?;
    write_trajectory_csv(&report.trajectory, std::io::BufWriter::new(file))
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Analytic(common) => {
            let mut cfg = load(&common)?;
            cfg.refine = false;
            single_point(cfg, &common)
        }
        Command::Optimize(common) => {
            let cfg = load(&common)?;
            single_point(cfg, &common)
        }
        Command::Simulate { common, trajectory } => {
            let mut cfg = load(&common)?;
            cfg.numeric = true;
            let traj = trajectory.or_else(|| cfg.trajectory_csv.as_ref().map(PathBuf::from));
            let code = single_point(cfg.clone(), &common)?;
            if let (Some(p), 0) = (traj, code) {
                write_trajectory(&cfg, &p)?;
            }
            Ok(code)
        }
        Command::Sweep(common) => {
            let cfg = load(&common)?;
            let result = sweep::run_sweep(&cfg, common.jobs)?;
            emit(&result, &common)?;
            let failures = result.diagnostic_failures();
            if failures > 0 {
                eprintln!("error: {failures} point(s) failed simulation diagnostics");
                return Ok(EXIT_DIAGNOSTIC);
            }
            for (i, r) in result.rows.iter().enumerate() {
                if let Some(e) = &r.error {
                    eprintln!("warning: point {i}: {e}");
                }
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config { .. } | Error::Domain { .. } => EXIT_CONFIG,
                Error::Diagnostic { .. } => EXIT_DIAGNOSTIC,
                _ => 1,
            })
        }
    }
}
