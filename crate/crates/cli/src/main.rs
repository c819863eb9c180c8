use clap::Parser;

fn main() {
    // clap exits with status 2 on usage errors
    let cli = ethds_cli::Cli::parse();
    std::process::exit(ethds_cli::run(cli));
}
