mod cli;

use clap::Parser;

fn main() {
    let code = match cli::Cli::try_parse() {
        Ok(parsed) => cli::execute(&parsed),
        Err(e) => {
            let code = if e.use_stderr() { cli::EXIT_USAGE } else { cli::EXIT_OK };
            let _ = e.print();
            code
        }
    };
    std::process::exit(code);
}
