use clap::Parser;

fn main() {
    let cli = wals_typology::cli::Cli::parse();
    match wals_typology::cli::run(cli) {
        Ok(out) => print!("{out}"),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
