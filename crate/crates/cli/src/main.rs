use clap::{Args, Parser, Subcommand, ValueEnum};
use landau_cli::commands;
use landau_cli::config::Config;
use landau_cli::error::CliError;
use landau_cli::record::{experiment_id, sibling, Output, Record};
use landau_cli::setup::setup;
use serde_json::json;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

/// Numerical experiments on a Landau Hamiltonian with a longitudinal well.
#[derive(Parser)]
#[command(name = "landau", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bound states and scattering data of the longitudinal well
    Bound(RunArgs),
    /// Second-order coefficient by the resolvent and channel routes
    Fgr(RunArgs),
    /// Resonance branch in the coupling and its quadratic fit
    Resonance(RunArgs),
    /// Survival amplitude of the embedded state and its decay fit
    Dynamics(RunArgs),
    /// Toeplitz eigenvalues, counting function and asymptotic law
    Toeplitz(RunArgs),
    /// Eigenvalue accumulation at the lowest level
    Gap(RunArgs),
    /// Compressed commutator near a level
    Mourre(RunArgs),
    /// Regression suite on the reference configuration
    All(RunArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file (optional for `all`)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; further tables go to `<stem>.<table>.csv` beside it
    #[arg(long)]
    out: PathBuf,
    /// Defaults to json for a `.json` output, csv otherwise
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads; falls back to LANDAU_THREADS, then to all cores
    #[arg(long)]
    threads: Option<usize>,
}

impl Command {
    fn split(&self) -> (&'static str, &RunArgs) {
        match self {
            Command::Bound(a) => ("bound", a),
            Command::Fgr(a) => ("fgr", a),
            Command::Resonance(a) => ("resonance", a),
            Command::Dynamics(a) => ("dynamics", a),
            Command::Toeplitz(a) => ("toeplitz", a),
            Command::Gap(a) => ("gap", a),
            Command::Mourre(a) => ("mourre", a),
            Command::All(a) => ("all", a),
        }
    }
}

fn thread_count(args: &RunArgs) -> Result<Option<usize>, CliError> {
    let n = match args.threads {
        Some(n) => Some(n),
        None => match std::env::var("LANDAU_THREADS") {
            Ok(s) if !s.trim().is_empty() => Some(
                s.trim()
                    .parse()
                    .map_err(|_| CliError::Usage(format!("LANDAU_THREADS must be a positive integer, got `{s}`")))?,
            ),
            _ => None,
        },
    };
    if n == Some(0) {
        return Err(CliError::Usage("thread count must be positive".into()));
    }
    Ok(n)
}

fn dispatch(name: &str, cfg: &Config) -> Result<Output, CliError> {
    if name == "all" {
        return commands::all(cfg);
    }
    if !cfg.has_section("task") {
        return Err(CliError::Usage(format!("`{name}` needs at least one `task.*` key in its config")));
    }
    let s = setup(cfg)?;
    match name {
        "bound" => commands::bound(cfg, &s),
        "fgr" => commands::fgr(cfg, &s),
        "resonance" => commands::resonance(cfg, &s),
        "dynamics" => commands::dynamics(cfg, &s),
        "toeplitz" => commands::toeplitz(cfg, &s),
        "gap" => commands::gap(cfg, &s),
        "mourre" => commands::mourre(cfg, &s),
        _ => unreachable!("subcommand {name}"),
    }
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn run(name: &str, args: &RunArgs, cfg: &Config, threads: usize) -> Result<(), CliError> {
    let start = Instant::now();
    let output = dispatch(name, cfg)?;
    cfg.finish(name)?;
    let failure = output.failure.clone();
    let record = Record::new(name, cfg.echo(), output);

    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let format = args.format.unwrap_or(match args.out.extension().and_then(|e| e.to_str()) {
        Some("json") => Format::Json,
        _ => Format::Csv,
    });
    match format {
        Format::Json => std::fs::write(&args.out, record.to_json()?)?,
        Format::Csv => {
            record.write_csv(&args.out)?;
        }
    }
    let seconds = start.elapsed().as_secs_f64();
    // kept out of the record so identical inputs give identical outputs
    write_json(
        &sibling(&args.out, "wallclock", "json"),
        &json!({ "experiment": record.experiment, "seconds": seconds, "threads": threads }),
    )?;
    eprintln!("landau {name}: {} in {seconds:.2} s on {threads} threads -> {}", record.experiment, args.out.display());
    for w in &record.warnings {
        eprintln!("warning: {w}");
    }
    match failure {
        Some(msg) => Err(CliError::Regression(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = cli.command.split();
    let result = (|| {
        let threads = thread_count(args)?;
        if let Some(n) = threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?;
        }
        let cfg = match &args.config {
            Some(path) => Config::load(path)?,
            None if name == "all" => Config::parse("<none>", PathBuf::new(), "")?,
            None => return Err(CliError::Usage(format!("`{name}` needs --config"))),
        };
        let outcome = run(name, args, &cfg, rayon::current_num_threads());
        Ok((cfg.echo(), outcome))
    })();
    let (input, result) = match result {
        Ok((input, outcome)) => (input, outcome),
        Err(e) => (BTreeMap::new(), Err(e)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.exit_code();
            if code == 1 {
                let path = sibling(&args.out, "diagnostics", "json");
                let diag = json!({
                    "experiment": experiment_id(name, &input),
                    "kind": e.kind(),
                    "message": e.to_string(),
                    "input": input,
                });
                if let Err(w) = write_json(&path, &diag) {
                    eprintln!("error: cannot write diagnostics: {w}");
                }
            }
            ExitCode::from(code)
        }
    }
}
