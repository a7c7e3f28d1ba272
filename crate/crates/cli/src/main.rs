use clap::Parser;
use linkcensus_cli::{run, Cli};
use std::io::{self, Write};
use std::process::ExitCode;

fn main() -> ExitCode {
    // usage errors exit with status 2 from inside clap
    let cli = Cli::parse();
    let mut out = io::stdout().lock();
    let status = match run(cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    };
    let _ = out.flush();
    status
}
