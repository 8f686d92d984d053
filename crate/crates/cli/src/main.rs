use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dstar_cli::commands::{format_probe, parse_list};
use dstar_cli::{cmd_probe, cmd_run, cmd_sweep, resolve_config, CliResult, Provenance, SEED_ENV};
use dstar_core::aggregation::Gar;
use dstar_core::simulator::AttackName;

#[derive(Parser)]
#[command(name = "dstar", version, about = "Byzantine-robust fastest-k SGD simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override a config key, e.g. `--set k=12` or `--set dataset.n=500`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every combination of aggregation rule and attack.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated rules, e.g. `dstar,trmean`.
        #[arg(long)]
        gars: String,
        /// Comma-separated attacks, e.g. `none,little,empire`.
        #[arg(long)]
        attacks: String,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the gradient-noise constants and the resilience angle.
    Probe {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

fn provenance(config: PathBuf, overrides: Vec<String>) -> Provenance {
    Provenance {
        config_path: config,
        overrides,
        env_seed: std::env::var(SEED_ENV).ok(),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run { config, overrides, out } => {
            let prov = provenance(config, overrides);
            let cfg = resolve_config(&prov.config_path, &prov.overrides, prov.env_seed.as_deref())?;
            let s = cmd_run(&cfg, &prov, &out)?;
            let acc = s.final_accuracy.map_or("-".to_string(), |a| format!("{a:.4}"));
            println!(
                "{} iterations: final loss {:.6}, final accuracy {acc}, mean wait time {:.6} s",
                s.iterations, s.final_loss, s.mean_wait_time
            );
            println!("wrote {}", out.display());
        }
        Command::Sweep {
            config,
            gars,
            attacks,
            overrides,
            out,
        } => {
            let gars: Vec<Gar> = parse_list(&gars)?;
            let attacks: Vec<AttackName> = parse_list(&attacks)?;
            let prov = provenance(config, overrides);
            let cfg = resolve_config(&prov.config_path, &prov.overrides, prov.env_seed.as_deref())?;
            let rows = cmd_sweep(&cfg, &prov, &gars, &attacks, &out)?;
            let mut failed = 0;
            for row in &rows {
                match &row.outcome {
                    Ok(s) => println!(
                        "{:>8} {:>7}  accuracy {:.4}  mean wait {:.6} s",
                        row.gar, row.attack, s.final_accuracy, s.mean_wait_time
                    ),
                    Err(e) => {
                        failed += 1;
                        println!("{:>8} {:>7}  error: {e}", row.gar, row.attack);
                    }
                }
            }
            println!("wrote {}", out.display());
            if failed > 0 {
                return Err(dstar_cli::CliError::runtime(format!("{failed} of {} cells failed", rows.len())));
            }
        }
        Command::Probe { config, overrides } => {
            let prov = provenance(config, overrides);
            let cfg = resolve_config(&prov.config_path, &prov.overrides, prov.env_seed.as_deref())?;
            print!("{}", format_probe(&cmd_probe(&cfg)?));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
