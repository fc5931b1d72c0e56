use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use secsim_core::analytic::InterferenceMode;
use secsim_core::config::load_params;
use secsim_core::diagnostics::config_warnings;
use secsim_core::io::write_obstacles;
use secsim_core::montecarlo::{generate_world, simulate, world_rng, write_trial_dump, Attack};
use secsim_core::sweep::{parse_beta_grid, run_sweep, SweepMode, SweepSpec, Vary};
use secsim_core::SystemParams;

/// Eavesdropping success probability in mmWave SWIPT networks.
#[derive(Parser)]
#[command(name = "secsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form ESP over the threshold grid.
    Analytic(SweepArgs),
    /// Monte Carlo ESP over random maps.
    Simulate(SimulateArgs),
    /// Both engines side by side with their absolute difference.
    Compare(SweepArgs),
    /// Write one random obstacle map as CSV.
    DumpWorld(DumpArgs),
    /// Check a configuration and list model warnings.
    ValidateConfig(ParamArgs),
}

#[derive(Args, Clone)]
struct ParamArgs {
    /// Flat key=value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// RNG seed; overrides ESP_SEED and the file.
    #[arg(long)]
    seed: Option<u64>,
    /// Interference integral mode.
    #[arg(long, value_parser = ["regularized", "paperFaithful"])]
    mode: Option<String>,
    /// Any configuration key, e.g. --set eta=0.5. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args, Clone)]
struct SweepArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Monte Carlo trials per grid point.
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Output CSV path; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Varied parameter, e.g. eta=0.3,0.5,0.8, fc=28,60 (GHz) or nb=1,3,5.
    #[arg(long)]
    vary: Option<String>,
    /// Threshold grid start:stop:step in dB.
    #[arg(long, default_value = "1:100:1", allow_hyphen_values = true)]
    beta_db: String,
    #[arg(long, default_value = "independent", value_parser = ["independent", "colluding"])]
    attack: String,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Write the header only.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Args, Clone)]
struct SimulateArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    /// Per-trial CSV (trial, eveX, eveY, linkKind, sinrDb, nInterferers); needs no --vary.
    #[arg(long)]
    dump_trials: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct DumpArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn resolve_params(args: &ParamArgs) -> Result<SystemParams> {
    let mut params = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            load_params(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => SystemParams::default(),
    };
    params.apply_env(|k| std::env::var(k).ok())?;
    for kv in &args.overrides {
        let Some((k, v)) = kv.split_once('=') else {
            bail!("--set expects KEY=VALUE, got `{kv}`");
        };
        params.set(k.trim(), v.trim())?;
    }
    if let Some(mode) = &args.mode {
        params.interference_mode = mode.parse::<InterferenceMode>().map_err(anyhow::Error::msg)?;
    }
    if let Some(seed) = args.seed {
        params.rng_seed = seed;
    }
    params.validate()?;
    Ok(params)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn sweep(mode: SweepMode, args: &SweepArgs) -> Result<SystemParams> {
    let params = resolve_params(&args.params)?;
    let spec = SweepSpec {
        mode,
        attack: args.attack.parse::<Attack>().map_err(anyhow::Error::msg)?,
        betas_db: parse_beta_grid(&args.beta_db).map_err(anyhow::Error::msg)?,
        vary: args.vary.as_deref().map(str::parse::<Vary>).transpose().map_err(anyhow::Error::msg)?,
        n_trials: args.trials,
        workers: args.workers,
        dry_run: args.dry_run,
    };
    if mode != SweepMode::Analytic && !spec.dry_run && spec.n_trials == 0 {
        bail!("--trials must be at least 1 (use --dry-run for a header-only file)");
    }
    let out = run_sweep(&spec, &params)?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    write_output(args.out.as_deref(), &out.csv)?;
    Ok(params)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analytic(args) => {
            sweep(SweepMode::Analytic, &args)?;
        }
        Command::Compare(args) => {
            sweep(SweepMode::Compare, &args)?;
        }
        Command::Simulate(args) => {
            if args.dump_trials.is_some() && args.sweep.vary.is_some() {
                bail!("--dump-trials cannot be combined with --vary");
            }
            let params = sweep(SweepMode::Simulate, &args.sweep)?;
            if let Some(path) = &args.dump_trials {
                let attack = args.sweep.attack.parse::<Attack>().map_err(anyhow::Error::msg)?;
                let outcomes = simulate(&params, attack, args.sweep.trials, args.sweep.workers)?;
                let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
                write_trial_dump(&outcomes, io::BufWriter::new(file))?;
            }
        }
        Command::DumpWorld(args) => {
            let params = resolve_params(&args.params)?;
            let world = generate_world(&params, &mut world_rng(params.rng_seed, 0));
            let mut buf = Vec::new();
            write_obstacles(&world.obstacles, &mut buf)?;
            write_output(args.out.as_deref(), &String::from_utf8(buf)?)?;
        }
        Command::ValidateConfig(args) => {
            let params = resolve_params(&args)?;
            let warnings = config_warnings(&params);
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            println!("configuration valid; {} warning(s)", warnings.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
