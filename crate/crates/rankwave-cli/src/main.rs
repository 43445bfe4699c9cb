use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rankwave_cli::{cmd_catastrophe, cmd_conditions, cmd_list, cmd_sample, cmd_verify, exit, Format, RunArgs, RunConfig};

#[derive(Parser)]
#[command(name = "rankwave", version, about = "Sample, verify and probe Riemann-invariant solutions of the isentropic Euler equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the registered families.
    List {
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Evaluate a family on a grid (CSV by default).
    Sample(RunArgs),
    /// Residuals of the flow equations on a grid (JSON by default).
    Verify(RunArgs),
    /// Compatibility and involutivity conditions at seeded points.
    Conditions(RunArgs),
    /// Predicted against bisected gradient blow-up times.
    Catastrophe(RunArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { exit::USAGE } else { exit::PASS };
            return ExitCode::from(code as u8);
        }
    };
    let result = match &cli.command {
        Command::List { format } => cmd_list(*format),
        Command::Sample(args) => RunConfig::resolve(args).and_then(|c| cmd_sample(&c)),
        Command::Verify(args) => RunConfig::resolve(args).and_then(|c| cmd_verify(&c)),
        Command::Conditions(args) => RunConfig::resolve(args).and_then(|c| cmd_conditions(&c)),
        Command::Catastrophe(args) => RunConfig::resolve(args).and_then(|c| cmd_catastrophe(&c)),
    };
    match result {
        Ok(outcome) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(outcome.stdout.as_bytes());
            let _ = stdout.flush();
            ExitCode::from(outcome.status as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
