fn main() {
    std::process::exit(quadsym::cli::run(std::env::args_os()));
}
