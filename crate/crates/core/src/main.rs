use clap::Parser;
use spraylab::cli::{execute, Args};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    std::process::exit(execute(&args));
}
