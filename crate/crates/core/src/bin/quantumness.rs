fn main() {
    std::process::exit(quantumness::cli::run(std::env::args_os()));
}
