//! Runs one scenario file and writes its report.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use invbanach::scenario::{emit, input_failure, load_scenario, run, Format, InputError, EXIT_INPUT};

#[derive(Parser, Debug)]
#[command(name = "invbanach", version, about = "Run a group-invariance scenario")]
struct Cli {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Overrides the attainment tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

fn main() -> ExitCode {
    invbanach::init_threads();
    let cli = Cli::parse();
    let (outcome, format, out) = match load_scenario(&cli.scenario) {
        Ok(mut s) => {
            if let Some(seed) = cli.seed {
                s.seed = seed;
            }
            let output = s.output.clone().unwrap_or_default();
            let format = cli.format.unwrap_or(output.format);
            let out = cli.out.clone().or(output.path);
            (run(&s, cli.tol), format, out)
        }
        Err(e) => (input_failure(None, &e), cli.format.unwrap_or_default(), cli.out.clone()),
    };
    if let Err(e) = emit(&outcome, format, out.as_deref()) {
        let err = InputError { path: String::new(), message: format!("writing output: {e}") };
        eprintln!("{}", serde_json::to_string_pretty(&input_failure(None, &err).json).expect("json"));
        return ExitCode::from(EXIT_INPUT as u8);
    }
    ExitCode::from(outcome.exit_code as u8)
}
