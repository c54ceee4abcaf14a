fn main() {
    std::process::exit(nhim::cli::run(std::env::args_os()));
}
