use clap::Parser;

use distillex::cli;

fn main() {
    let parsed = match cli::Cli::try_parse() {
        Ok(p) => p,
        Err(e) => {
            // clap prints help/version through this path with status 0
            let code = if e.exit_code() == 0 { 0 } else { cli::EXIT_USAGE };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match cli::run(parsed) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(cli::exit_code_for(&err));
        }
    }
}
