fn main() {
    std::process::exit(boxperturb::cli::run(std::env::args_os()));
}
