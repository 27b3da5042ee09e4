use clap::Parser;

fn main() {
    let cli = cfx_cli::config::Cli::parse();
    if let Err(e) = cfx_cli::run(cli) {
        eprintln!("cfx: {e}");
        std::process::exit(e.exit_code());
    }
}
