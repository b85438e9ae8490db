use clap::Parser;

fn main() {
    // clap exits with code 2 on usage errors and 0 for --help / --version
    let cli = realclone_cli::args::Cli::parse();
    std::process::exit(realclone_cli::run(cli));
}
