use clap::Parser;

fn main() {
    let cli = qubo_eigen_cli::Cli::parse();
    match qubo_eigen_cli::run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}
