use clap::Parser;

fn main() {
    std::process::exit(warpcurv::cli::run(warpcurv::cli::Cli::parse()));
}
