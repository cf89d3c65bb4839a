use clap::Parser;

fn main() {
    let cli = ler_cli::Cli::parse();
    if let Err(e) = ler_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
