use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use mlcs_bench::args::Cli;

fn main() -> ExitCode {
    // clap exits with status 2 on flag errors.
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let code = match mlcs_bench::run(cli.command, &mut lock) {
        Ok(code) => code,
        Err(err) => {
            let _ = lock.flush();
            eprintln!("error: {err}");
            err.exit_code()
        }
    };
    let _ = lock.flush();
    ExitCode::from(code as u8)
}
