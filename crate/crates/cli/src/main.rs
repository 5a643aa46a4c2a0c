use clap::Parser;

fn main() {
    let cli = alq_panel_cli::Cli::parse();
    if let Err(e) = alq_panel_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
