use clap::Parser;

fn main() {
    let cli = solitonlab::cli::Cli::parse();
    if let Err(e) = solitonlab::cli::run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
