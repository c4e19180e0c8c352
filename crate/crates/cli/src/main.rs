//! `randvort`: run the field studies and torus simulations and write their
//! tables to an artifact directory.

mod commands;
mod error;
mod output;
mod params;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::error::CliError;
use crate::params::{parse_overrides, Params};

#[derive(Parser, Debug)]
#[command(name = "randvort", version, about = "Random vortex-patch fields: studies and simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// INI file with a [run] section and a section named after the command.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Artifact directory (default: $RANDVORT_OUT/<command>-seed<seed>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker cap; 0 uses every core.
    #[arg(long)]
    threads: Option<usize>,
    /// Parameter overrides: `--key value`, `--key=value` or `key=value`.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "OVERRIDES")]
    overrides: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Kernel identity, patch-velocity oracle and symmetry checks.
    VerifyKernel(Common),
    /// Empirical log-Lipschitz constant of the patch velocity.
    VerifyLipschitz(Common),
    /// E|u0(x)|^2 / ln(e + |x|) over a list of radii.
    Growth(Common),
    /// |E u0(x)·u0(y)| / ln(e + |x - y|) over separations.
    Decorrelation(Common),
    /// Normalized S(x, y) over a grid of pairs.
    SBound(Common),
    /// Morrey norms of sampled realizations for several outer radii.
    Morrey(Common),
    /// Ensemble squared Morrey norm of the rescaled field.
    Scaling(Common),
    /// Torus Euler evolution from a preset initial vorticity.
    Evolve(Common),
    /// Weak-formulation residual under grid and snapshot refinement.
    WeakResidual(Common),
    /// Monte Carlo moments of u0 against exact lattice sums.
    Moments(Common),
}

impl Command {
    fn split(self) -> (&'static str, Common) {
        match self {
            Command::VerifyKernel(c) => ("verify-kernel", c),
            Command::VerifyLipschitz(c) => ("verify-lipschitz", c),
            Command::Growth(c) => ("growth", c),
            Command::Decorrelation(c) => ("decorrelation", c),
            Command::SBound(c) => ("s-bound", c),
            Command::Morrey(c) => ("morrey", c),
            Command::Scaling(c) => ("scaling", c),
            Command::Evolve(c) => ("evolve", c),
            Command::WeakResidual(c) => ("weak-residual", c),
            Command::Moments(c) => ("moments", c),
        }
    }
}

fn default_out(command: &str, seed: u64) -> PathBuf {
    let root = std::env::var_os("RANDVORT_OUT").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("randvort-out"));
    root.join(format!("{command}-seed{seed}"))
}

fn run(command: &'static str, common: Common) -> Result<PathBuf, CliError> {
    let mut overrides = parse_overrides(&common.overrides)?;
    let mut config = common.config.clone();
    // Flags that landed among the trailing overrides still count as flags.
    if let Some(i) = overrides.iter().position(|(k, _)| k == "config") {
        config = Some(PathBuf::from(overrides.remove(i).1));
    }
    for (key, value) in [
        ("seed", common.seed.map(|v| v.to_string())),
        ("threads", common.threads.map(|v| v.to_string())),
        ("out", common.out.as_ref().map(|p| p.display().to_string())),
    ] {
        if let Some(v) = value {
            overrides.insert(0, (key.to_string(), v));
        }
    }
    let schema = commands::schema(command).expect("every subcommand has a schema");
    let mut params = Params::resolve(command, schema, config.as_deref(), &overrides)?;
    let seed = params.seed()?;
    let threads = params.threads()?;
    let out = match params.raw("out") {
        "" => default_out(command, seed),
        dir => PathBuf::from(dir),
    };
    params.set("out", out.display().to_string());
    let job = commands::prepare(command, &params)?;

    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start {threads} workers: {e}")))?;
    }
    let mut art = output::Artifacts::create(&out)?;
    let ctx = commands::Ctx { config_hash: output::config_hash(command, &params) };
    let outcome = job.run(&mut art, &ctx)?;
    art.manifest(command, &params, config.as_deref().map(Path::new), outcome.fitted, outcome.results)?;
    Ok(out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (command, common) = cli.command.split();
    match run(command, common) {
        Ok(dir) => {
            println!("{}", dir.join("manifest.json").display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let record = json!({ "error": e.kind(), "message": e.message(), "command": command, "exit_code": e.exit_code() });
            eprintln!("{record}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
