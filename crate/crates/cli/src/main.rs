use clap::Parser;
use conekit_cli::{execute, Cli};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let (out, code) = execute(&cli);
    print!("{out}");
    std::process::exit(code);
}
