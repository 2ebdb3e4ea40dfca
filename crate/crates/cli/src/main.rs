use std::io;
use std::process::ExitCode;

use clap::Parser;
use metacheck::args::Cli;
use metacheck::driver::run_file;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mut out, mut err) = (io::stdout().lock(), io::stderr().lock());
    match run_file(&cli.file, &cli.options(), &mut out, &mut err) {
        Ok(report) => ExitCode::from(report.exit_code() as u8),
        Err(e) => {
            eprintln!("metacheck: output error: {}", e);
            ExitCode::from(3)
        }
    }
}
