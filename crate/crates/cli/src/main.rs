use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use gka_core::costmodel::emit_comparison;
use gka_core::simnet::{run_scenario, SimConfig};
use gka_core::{selftest, Error};

const EXIT_USAGE: u8 = 1;
const EXIT_FAILED: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "gka", version, about = "Threshold group key agreement simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one scenario and write transcript.jsonl and verdict.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print per-member authentication cost for the three schemes.
    Costs {
        #[arg(long, default_value_t = 100)]
        m_min: u64,
        #[arg(long, default_value_t = 300)]
        m_max: u64,
        #[arg(long, default_value_t = 2)]
        step: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Run the built-in invariant suites.
    Selftest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match cli.command {
        Command::Run { config, out, seed } => cmd_run(&config, &out, seed),
        Command::Costs { m_min, m_max, step, format } => cmd_costs(m_min, m_max, step, format),
        Command::Selftest => cmd_selftest(),
    }
}

fn cmd_run(config_path: &Path, out: &Path, seed: Option<u64>) -> ExitCode {
    let text = match fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => return usage_error(format!("cannot read {}: {e}", config_path.display())),
    };
    let mut config = match SimConfig::from_toml(&text) {
        Ok(c) => c,
        Err(e) => return usage_error(format!("{}: {e}", config_path.display())),
    };
    if let Some(seed) = seed {
        config.seed = seed;
    }
    let (transcript, verdict) = match run_scenario(&config) {
        Ok(run) => run,
        Err(e @ (Error::Config(_) | Error::UnknownScenario(_))) => return usage_error(e.to_string()),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_FAILED);
        }
    };
    let written = fs::create_dir_all(out)
        .and_then(|_| fs::write(out.join("transcript.jsonl"), transcript.to_jsonl()))
        .and_then(|_| fs::write(out.join("verdict.json"), verdict.to_json()));
    if let Err(e) = written {
        return usage_error(format!("cannot write to {}: {e}", out.display()));
    }
    println!("{} seed {}: {}", verdict.scenario, verdict.seed, verdict.outcome);
    if verdict.passed {
        ExitCode::SUCCESS
    } else {
        for (name, _) in verdict.properties.iter().filter(|(_, ok)| !**ok) {
            eprintln!("property failed: {name}");
        }
        ExitCode::from(EXIT_FAILED)
    }
}

fn cmd_costs(m_min: u64, m_max: u64, step: u64, format: Format) -> ExitCode {
    let csv = match emit_comparison(m_min, m_max, step) {
        Ok(csv) => csv,
        Err(e) => return usage_error(e.to_string()),
    };
    match format {
        Format::Csv => print!("{csv}"),
        Format::Json => {
            let rows: Vec<serde_json::Value> = csv
                .lines()
                .skip(1)
                .map(|line| {
                    let cells: Vec<u64> = line.split(',').map(|c| c.parse().expect("integer cell")).collect();
                    serde_json::json!({"m": cells[0], "proposed": cells[1], "chien": cells[2], "harn": cells[3]})
                })
                .collect();
            println!("{}", serde_json::Value::Array(rows));
        }
    }
    ExitCode::SUCCESS
}

fn cmd_selftest() -> ExitCode {
    let suites = selftest::run_all();
    for suite in &suites {
        if suite.passed() {
            println!("PASS {} ({} checks)", suite.name, suite.checks);
        } else {
            println!("FAIL {} ({} of {} checks failed: {})", suite.name, suite.failures.len(), suite.checks, suite.failures.join("; "));
        }
    }
    if suites.iter().all(|s| s.passed()) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILED)
    }
}

fn usage_error(msg: String) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}
