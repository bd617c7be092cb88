use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;
use stokes_cli::args::Cli;
use stokes_cli::document::CliError;
use stokes_cli::run::{error_document, render, run};
use std::io::Write;

fn main() {
    let (out, code) = match Cli::try_parse() {
        Ok(cli) => run(&cli),
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            eprint!("{e}");
            let argv: Vec<String> = std::env::args().skip(1).collect();
            let err = CliError::usage(e.render().to_string().trim_end());
            (render(&error_document(json!({ "argv": argv }), serde_json::Value::Null, &err)), 2)
        }
    };
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(out.as_bytes());
    let _ = stdout.flush();
    std::process::exit(code);
}
