use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use zpflab::report::{emit_trace, RunReport};
use zpflab::scenario::{parse_seed, run_scenario, ScenarioConfig, Seed, CONFIG_SCHEMA};
use zpflab::suite::{run_suite, SuiteOptions};
use zpflab::Error;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "zpflab", version, about = "Random-phase field response laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario config.
    Run {
        config: PathBuf,
        /// Write report.json (and trace.csv when the run has one) here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides params.seed; decimal or 0x-prefixed hex.
        #[arg(long, value_parser = parse_seed_arg)]
        seed: Option<u64>,
        /// Overrides params.samples.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        quiet: bool,
    },
    /// Run the full acceptance battery.
    Suite {
        #[arg(long, default_value_t = 1, value_parser = parse_seed_arg)]
        seed: u64,
        #[arg(long)]
        quiet: bool,
    },
    /// Print the config JSON schema.
    Schema,
}

fn parse_seed_arg(s: &str) -> Result<u64, String> {
    parse_seed(s).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Schema => {
            print!("{CONFIG_SCHEMA}");
            ExitCode::SUCCESS
        }
        Command::Suite { seed, quiet } => suite(seed, quiet),
        Command::Run {
            config,
            out,
            seed,
            samples,
            quiet,
        } => match run(&config, out.as_deref(), seed, samples, quiet) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(EXIT_FAIL),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(match e {
                    Error::Io(_) => EXIT_FAIL,
                    _ => EXIT_USAGE,
                })
            }
        },
    }
}

fn run(path: &Path, out: Option<&Path>, seed: Option<u64>, samples: Option<usize>, quiet: bool) -> zpflab::Result<bool> {
    let mut config = ScenarioConfig::load(path)?;
    if let Some(s) = seed {
        config.params.seed = Some(Seed(s));
    }
    if let Some(n) = samples {
        config.params.samples = Some(n);
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let report = run_scenario(&config, base)?;
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join("report.json"), report.to_json_pretty() + "\n")?;
            if report.trace.is_some() {
                emit_trace(&report, &dir.join("trace.csv"))?;
            }
        }
        None => println!("{}", report.to_json_pretty()),
    }
    if !quiet {
        summarize(&report);
    }
    Ok(report.pass)
}

fn summarize(report: &RunReport) {
    for c in &report.checks {
        eprintln!("{} {}", if c.pass { "ok  " } else { "FAIL" }, c.name);
    }
    let failed = report.checks.iter().filter(|c| !c.pass).count();
    eprintln!(
        "{}: {} ({} checks, {failed} failed)",
        report.experiment,
        if report.pass { "PASS" } else { "FAIL" },
        report.checks.len()
    );
}

fn suite(seed: u64, quiet: bool) -> ExitCode {
    let opts = SuiteOptions {
        seed,
        ..SuiteOptions::default()
    };
    let outcomes = run_suite(&opts);
    for o in &outcomes {
        println!("criterion {}: {} ({})", o.id, if o.pass { "PASS" } else { "FAIL" }, o.title);
        if !quiet {
            for c in o.checks.iter().filter(|c| !c.pass) {
                eprintln!("  failed: {} expected {} observed {}", c.name, c.expected, c.observed);
            }
        }
    }
    if outcomes.iter().all(|o| o.pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}
