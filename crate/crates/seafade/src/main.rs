use clap::Parser;
use seafade::cli::{run, Cli};
use seafade::error::Error;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(manifest) => {
            eprintln!(
                "{} finished in {:.2} s; {} artifact(s) in place",
                manifest.subcommand,
                manifest.wall_time_s,
                manifest.artifacts.len()
            );
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Config { .. } | Error::Toml(_) => 2,
                _ => 1,
            };
            std::process::exit(code);
        }
    }
}
