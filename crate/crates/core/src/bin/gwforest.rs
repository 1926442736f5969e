use clap::Parser;
use gwforest::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    std::process::exit(run(&cli.command.into_config()));
}
