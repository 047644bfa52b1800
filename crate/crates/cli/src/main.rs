use clap::Parser;

fn main() {
    let cli = kicktop_cli::Cli::parse();
    if let Err(e) = kicktop_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
