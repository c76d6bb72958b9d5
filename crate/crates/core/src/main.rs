use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use teichlab::cli::{error_exit_code, run, Command, ExperimentConfig, EXIT_CONFIG};
use teichlab::Error;

#[derive(Parser)]
#[command(
    name = "teichlab",
    version,
    about = "Quasiconformal and Teichmüller numerics"
)]
struct Args {
    #[command(subcommand)]
    command: Sub,
    /// JSON experiment config; missing fields take defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Root for run directories; nothing is written without it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Radial cutoff exponent k, so the grid reaches 1 - 2^-k.
    #[arg(long, global = true)]
    resolution: Option<u32>,
    /// Angular nodes per ring.
    #[arg(long, global = true)]
    angles: Option<usize>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print a machine-readable summary on stdout.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// Principal solution of a named coefficient, with oracle errors.
    Solve,
    /// Bers projection of a named coefficient.
    Bers,
    /// Ahlfors-Weill section and its round trip.
    Aw,
    /// Orbit series for a coboundary with its certificate.
    Rigidity,
    /// Subdivision upper bound on the distance to the origin.
    WpBound,
    /// Quasisymmetric quotient ladder of a circle map.
    Qs,
    /// Liouville cocycle norm of a circle map.
    Cocycle,
    /// Randomized inequality suite.
    Verify,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Solve => Command::Solve,
            Sub::Bers => Command::Bers,
            Sub::Aw => Command::Aw,
            Sub::Rigidity => Command::Rigidity,
            Sub::WpBound => Command::WpBound,
            Sub::Qs => Command::Qs,
            Sub::Cocycle => Command::Cocycle,
            Sub::Verify => Command::Verify,
        }
    }
}

fn config(args: &Args) -> teichlab::Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(k) = args.resolution {
        cfg.grid.k = k;
    }
    if let Some(m) = args.angles {
        cfg.grid.angles = m;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::init();
    let args = Args::parse();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("cannot set up {n} threads: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    }
    let command = Command::from(args.command);
    let result = config(&args).and_then(|cfg| run(command, &cfg, args.out.as_deref()));
    let code = match &result {
        Ok((record, dir)) => {
            if args.json {
                let summary = serde_json::json!({
                    "command": command.name(),
                    "payload_hash": record.payload_hash,
                    "pass": record.pass,
                    "outputs": record.outputs,
                    "run_dir": dir,
                    "exit_code": record.exit_code(),
                });
                println!(
                    "{}",
                    serde_json::to_string_pretty(&summary).unwrap_or_default()
                );
            } else {
                println!("{} {}", command.name(), record.payload_hash);
                for (k, ok) in &record.pass {
                    println!("  {k}: {}", if *ok { "pass" } else { "FAIL" });
                }
                if let Some(d) = dir {
                    println!("  written to {}", d.display());
                }
            }
            record.exit_code()
        }
        Err(e) => {
            report_error(e, args.json);
            error_exit_code(e)
        }
    };
    ExitCode::from(code.clamp(0, 255) as u8)
}

fn report_error(e: &Error, json: bool) {
    if json {
        let v = serde_json::json!({ "error": e.to_string(), "code": e.code() });
        println!("{v}");
    } else {
        eprintln!("error [{}]: {e}", e.code());
    }
}
