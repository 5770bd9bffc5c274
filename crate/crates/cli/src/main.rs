use clap::Parser;

fn main() {
    let cli = alphagrad_cli::Cli::parse();
    std::process::exit(alphagrad_cli::run(&cli));
}
