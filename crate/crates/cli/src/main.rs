use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use sepavg_cli::{run, Cli, CliError, Outcome};

fn emit(cli: &Cli, out: Outcome) -> Result<u8, CliError> {
    let io_err = |e: std::io::Error| CliError {
        code: 2,
        message: e.to_string(),
    };
    let mut stdout = std::io::stdout().lock();
    match (&out.csv, &cli.common.output) {
        (Some(csv), Some(path)) => {
            std::fs::write(path, csv).map_err(|e| CliError {
                code: 2,
                message: format!("cannot write {}: {e}", path.display()),
            })?;
            stdout.write_all(out.report.as_bytes()).map_err(io_err)?;
        }
        (Some(csv), None) => {
            stdout.write_all(csv.as_bytes()).map_err(io_err)?;
            eprint!("{}", out.report);
        }
        (None, _) => stdout.write_all(out.report.as_bytes()).map_err(io_err)?,
    }
    Ok(out.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).and_then(|out| emit(&cli, out)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("sepavg: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
