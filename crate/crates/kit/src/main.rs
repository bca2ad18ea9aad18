fn main() {
    std::process::exit(mobility_kit::cli::run(std::env::args_os()));
}
