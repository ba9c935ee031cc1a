use clap::Parser;

fn main() {
    let cli = hitailor_cli::Cli::parse();
    std::process::exit(hitailor_cli::run(cli));
}
