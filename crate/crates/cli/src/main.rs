use clap::Parser;
use nonholo_cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let outcome = run(Cli::parse());
    println!(
        "{}",
        serde_json::to_string_pretty(&outcome.report).expect("reports serialize")
    );
    std::process::exit(outcome.code);
}
