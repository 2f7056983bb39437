use clap::Parser;

fn main() {
    env_logger::init();
    let cli = sonine::cli::Cli::parse();
    std::process::exit(sonine::cli::execute(cli));
}
