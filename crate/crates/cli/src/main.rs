use std::process::ExitCode;

use clap::Parser;

use cavityw::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cavityw: {} error: {e}", e.class());
            eprintln!("{}", serde_json::to_string(&e.report()).expect("error report serializes"));
            ExitCode::from(e.exit_code())
        }
    }
}
