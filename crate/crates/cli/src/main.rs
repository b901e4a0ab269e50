use clap::Parser;

use chartground_cli::{run, Cli, RunConfig};

fn main() {
    let config = RunConfig::from(Cli::parse());
    match run(&config) {
        Ok(summary) => {
            println!("{:?}: {} samples, {} passed", summary.task, summary.samples, summary.passed);
            for a in &summary.artifacts {
                println!("wrote {}", a.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
