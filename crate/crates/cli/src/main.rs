use clap::Parser;

fn main() {
    let cli = approxchol_cli::Cli::parse();
    std::process::exit(approxchol_cli::run(cli));
}
