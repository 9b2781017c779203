use clap::Parser;

fn main() {
    std::process::exit(feller_stop_cli::run(feller_stop_cli::Cli::parse()));
}
