use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qpolar_cli::commands::{run_check_degradation, run_construct, run_simulate_channel, run_simulate_source};
use qpolar_cli::config::Config;
use qpolar_cli::plot::{plot, PlotOptions};
use qpolar_cli::table::{diff, Table, WALL_TIME};
use qpolar_cli::verify::{self, VerifyOptions};
use qpolar_cli::{exit, CliError, Result};

#[derive(Parser)]
#[command(name = "qpolar", version, about = "q-ary polar code experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Config file (key = value lines).
    #[arg(short, long)]
    config: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides snr_db; a list such as "0:2:10" for simulate-channel.
    #[arg(long = "snr-db", allow_hyphen_values = true)]
    snr_db: Option<String>,
    #[arg(long)]
    constellation: Option<String>,
    /// Extra key=value override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl RunArgs {
    fn config(&self) -> Result<Config> {
        let mut cfg = Config::load(&self.config)?;
        if let Some(w) = self.workers {
            cfg.set("workers", w.to_string());
        }
        if let Some(s) = self.seed {
            cfg.set("seed", s.to_string());
        }
        if let Some(s) = &self.snr_db {
            cfg.set("snr_db", s.as_str());
        }
        if let Some(c) = &self.constellation {
            cfg.set("constellation", c.as_str());
        }
        for pair in &self.set {
            cfg.set_pair(pair)?;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Estimate Bhattacharyya parameters and write a code file.
    Construct(RunArgs),
    /// Compress and decompress source blocks with side information.
    SimulateSource(RunArgs),
    /// Transmit coded frames over AWGN for a list of SNRs.
    SimulateChannel(RunArgs),
    /// Compare per-index Z of a channel and a degraded version of it.
    CheckDegradation(RunArgs),
    /// Draw CSV tables as one SVG line plot.
    Plot {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        x: Option<String>,
        /// Comma-separated y columns.
        #[arg(long)]
        y: Option<String>,
        #[arg(long = "log-y")]
        log_y: Option<bool>,
        #[arg(long)]
        title: Option<String>,
    },
    /// Run the acceptance checks and print one PASS/FAIL line each.
    Verify {
        /// Comma-separated criterion numbers.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<u8>>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Compare two tables cell by cell, ignoring timing columns.
    DiffCsv {
        a: PathBuf,
        b: PathBuf,
        /// Columns and metadata keys to skip.
        #[arg(long, value_delimiter = ',', default_value = WALL_TIME)]
        ignore: Vec<String>,
    },
}

fn run(cmd: Command) -> Result<String> {
    match cmd {
        Command::Construct(a) => run_construct(&a.config()?),
        Command::SimulateSource(a) => run_simulate_source(&a.config()?),
        Command::SimulateChannel(a) => run_simulate_channel(&a.config()?),
        Command::CheckDegradation(a) => run_check_degradation(&a.config()?),
        Command::Plot { inputs, out, x, y, log_y, title } => plot(&inputs, &out, &PlotOptions { x, y, log_y, title }),
        Command::Verify { only, workers } => {
            if workers == 0 {
                return Err(CliError::Config("workers must be at least 1".into()));
            }
            let opts = VerifyOptions { only, workers, ..Default::default() };
            let outcomes = verify::run(&opts, |o| println!("{}", o.line()));
            let failed = outcomes.iter().filter(|o| !o.pass).count();
            if failed > 0 {
                Err(CliError::CheckFailed(format!("{failed} of {} criteria failed", outcomes.len())))
            } else {
                Ok(format!("all {} criteria passed", outcomes.len()))
            }
        }
        Command::DiffCsv { a, b, ignore } => {
            let ignore: Vec<&str> = ignore.iter().map(String::as_str).collect();
            let d = diff(&Table::read(&a)?, &Table::read(&b)?, &ignore);
            if d.is_empty() {
                Ok("tables match".into())
            } else {
                Err(CliError::CheckFailed(d.join("\n")))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::CONFIG as u8 } else { exit::OK as u8 });
        }
    };
    match run(cli.command) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qpolar: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
