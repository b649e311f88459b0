use clap::Parser;

fn main() {
    let cli = bncensus::cli::Cli::parse();
    std::process::exit(bncensus::cli::run(&cli));
}
