//! `eztc`: well-posedness, free-boundary solves, policy tables, small-cost expansions,
//! comparative-statics sweeps and policy simulation from the command line.
//!
//! The JSON summary goes to stdout; CSV artifacts go to `--out` when given.
//! Exit status: 0 on success, 2 when the inputs are ill-posed, 1 on errors.

mod commands;
mod config;
mod error;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::Overrides;
use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "eztc",
    version,
    about = "Transaction-cost portfolio choice under Epstein-Zin utility"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Classify the cost level as well-posed or ill-posed.
    Wellposed,
    /// Solve for the shadow no-trade boundaries and the consumption-wealth curve.
    Solve,
    /// Real no-trade boundaries and the kappa and p curves.
    Policy,
    /// Small-cost expansion coefficients and residuals against the full solver.
    Asymptotics,
    /// Monte Carlo simulation of the optimally controlled state.
    Simulate,
    /// Boundaries across a grid of one model parameter.
    Sweep,
}

#[derive(Args)]
struct Opts {
    /// JSON configuration file (a previous summary is accepted too).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for CSV output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Round-trip cost; split evenly unless one of the gamma flags is also given.
    #[arg(long, global = true)]
    xi: Option<f64>,
    #[arg(long = "gamma-up", global = true)]
    gamma_up: Option<f64>,
    #[arg(long = "gamma-down", global = true)]
    gamma_down: Option<f64>,
    /// Sweep parameter: r, mu, sigma, R, S or delta.
    #[arg(long, global = true)]
    param: Option<String>,
    /// Sweep grid a:b:n.
    #[arg(long, global = true)]
    grid: Option<String>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[arg(long, global = true)]
    paths: Option<usize>,
    #[arg(long, global = true)]
    horizon: Option<f64>,
}

impl Opts {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            xi: self.xi,
            gamma_up: self.gamma_up,
            gamma_down: self.gamma_down,
            param: self.param.clone(),
            grid: self.grid.clone(),
            dt: self.dt,
            paths: self.paths,
            horizon: self.horizon,
        }
    }
}

fn run(cli: &Cli) -> Result<commands::Status, CliError> {
    let mut raw = config::load(cli.opts.config.as_ref())?;
    config::apply(&mut raw, &cli.opts.overrides());
    let cfg = config::validate(raw)?;
    let out = cli.opts.out.as_deref();
    let (summary, status) = match cli.command {
        Command::Wellposed => commands::wellposed(&cfg),
        Command::Solve => commands::solve(&cfg, out),
        Command::Policy => commands::policy(&cfg, out),
        Command::Asymptotics => commands::asymptotics(&cfg, out),
        Command::Simulate => commands::simulate(&cfg, out),
        Command::Sweep => commands::sweep_cmd(&cfg, out),
    }?;
    let mut stdout = std::io::stdout().lock();
    let written = writeln!(stdout, "{}", serde_json::to_string_pretty(&summary)?);
    match written {
        // a closed downstream pipe is not a failure of the computation
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Write {
            path: PathBuf::from("<stdout>"),
            source: e,
        }),
        _ => Ok(status),
    }
}

fn main() -> ExitCode {
    // usage errors must not share exit status 2 with ill-posed inputs
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(status) => ExitCode::from(status.code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
