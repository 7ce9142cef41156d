fn main() {
    std::process::exit(mswave_cli::run(std::env::args().collect()));
}
