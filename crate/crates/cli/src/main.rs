//! `sls`: regenerates the figure data for lattice dynamics under resets and
//! projective measurements, and cross-checks the solution paths.

mod config;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{Experiment, ExperimentConfig, Format, Preset};
use output::Manifest;

#[derive(Parser)]
#[command(name = "sls", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its tables and manifest.
    Run(RunArgs),
    /// Run a verification suite; exits nonzero if any check fails.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Named preset to start from.
    #[arg(long, value_enum, conflicts_with = "config")]
    preset: Option<Preset>,
    /// TOML (or .json) config file to start from.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    experiment: Option<Experiment>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct Overrides {
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    n_sites: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    /// Rates, comma-separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    lambda: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    n0: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    target: Option<i64>,
    /// Observed sites, comma-separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    sites: Option<Vec<i64>>,
    #[arg(long, allow_hyphen_values = true)]
    t_max: Option<f64>,
    #[arg(long)]
    t_steps: Option<usize>,
    /// Explicit observation times, comma-separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    times: Option<Vec<f64>>,
    #[arg(long)]
    p_max: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Crosscheck,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    #[command(flatten)]
    overrides: Overrides,
}

impl Overrides {
    fn apply(self, cfg: &mut ExperimentConfig) {
        macro_rules! set {
            ($($field:ident => $target:ident),*) => {
                $(if let Some(v) = self.$field { cfg.$target = v; })*
            };
        }
        set!(out => out, seed => seed, realizations => realizations, n_sites => n_sites, delta => delta,
             lambda => lambdas, n0 => n0, target => target, sites => sites, t_max => t_max,
             t_steps => t_steps, format => format);
        if let Some(times) = self.times {
            cfg.times = Some(times);
        }
        if let Some(p) = self.p_max {
            cfg.p_max = Some(p);
        }
    }
}

/// Error categories reported on stderr as one JSON object.
enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
    ChecksFailed,
}

fn effective_config(args: RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = match (args.preset, &args.config) {
        (Some(p), _) => ExperimentConfig::preset(p),
        (None, Some(path)) => ExperimentConfig::from_file(path)?,
        (None, None) => match args.experiment {
            Some(e) => ExperimentConfig {
                experiment: e,
                ..ExperimentConfig::default()
            },
            None => bail!("one of --preset, --config or --experiment is required"),
        },
    };
    if let Some(e) = args.experiment {
        cfg.experiment = e;
    }
    args.overrides.apply(&mut cfg);
    Ok(cfg)
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("SLS_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("SLS_THREADS must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    Ok(())
}

fn execute(cfg: &ExperimentConfig) -> Result<Vec<experiments::Check>> {
    let start = Instant::now();
    let result = experiments::run(cfg)?;
    let mut files: Vec<String> = output::write_tables(&cfg.out, &result.tables, cfg.format)?
        .iter()
        .map(|p| p.display().to_string())
        .collect();
    for w in &result.warnings {
        log::warn!("{w}");
    }
    let manifest_path = cfg.out.join("manifest.json");
    files.push(manifest_path.display().to_string());
    output::write_manifest(
        &cfg.out,
        &Manifest {
            tool: "sls",
            version: env!("CARGO_PKG_VERSION"),
            core_version: sls_core::VERSION,
            schema_version: output::SCHEMA_VERSION,
            experiment: cfg.experiment.name(),
            seed: cfg.seed,
            config: cfg,
            threads: rayon::current_num_threads(),
            wall_time_seconds: start.elapsed().as_secs_f64(),
            files: files.clone(),
            warnings: &result.warnings,
            checks: &result.checks,
        },
    )?;
    for f in &files {
        println!("wrote {f}");
    }
    Ok(result.checks)
}

fn run(cli: Cli) -> std::result::Result<(), Failure> {
    configure_threads().map_err(Failure::Config)?;
    match cli.command {
        Command::Run(args) => {
            let cfg = effective_config(args).map_err(Failure::Config)?;
            cfg.validate().map_err(Failure::Config)?;
            execute(&cfg).map_err(Failure::Runtime)?;
            Ok(())
        }
        Command::Verify(args) => {
            let mut cfg = match args.suite {
                Suite::Crosscheck => ExperimentConfig::preset(Preset::Crosscheck),
            };
            cfg.out = PathBuf::from("out/verify-crosscheck");
            args.overrides.apply(&mut cfg);
            cfg.validate().map_err(Failure::Config)?;
            let checks = execute(&cfg).map_err(Failure::Runtime)?;
            let mut ok = true;
            for c in &checks {
                ok &= c.pass;
                println!(
                    "{} {}: {:.3e} (tolerance {:.1e})",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.tolerance
                );
            }
            if ok {
                Ok(())
            } else {
                Err(Failure::ChecksFailed)
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (code, kind, err) = match run(cli) {
        Ok(()) => return ExitCode::SUCCESS,
        Err(Failure::Config(e)) => (2, "invalid_config", e),
        Err(Failure::Runtime(e)) => (1, "runtime", e),
        Err(Failure::ChecksFailed) => (3, "checks_failed", anyhow::anyhow!("verification checks failed")),
    };
    let diagnostic = serde_json::json!({
        "error": kind,
        "message": format!("{err:#}"),
    });
    eprintln!("{diagnostic}");
    ExitCode::from(code)
}
