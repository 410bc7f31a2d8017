use clap::Parser;

use respoly::cli::{error_report, run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RESPOLY_LOG", "warn")).init();
    // Usage errors are invalid input (exit 1); clap's own code would be 2.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", error_report(&e));
            e.exit_code()
        }
    };
    std::process::exit(code);
}
