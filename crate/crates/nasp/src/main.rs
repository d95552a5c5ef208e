use clap::Parser;

fn main() {
    let code = nasp::run(nasp::Cli::parse());
    std::process::exit(code);
}
