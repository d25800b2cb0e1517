fn main() {
    std::process::exit(fecc::cli::run(std::env::args_os()));
}
