use clap::Parser;

fn main() {
    let cli = grec::cli::Cli::parse();
    if let Err(e) = grec::cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
