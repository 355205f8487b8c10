fn main() {
    std::process::exit(pgan::cli::run(std::env::args_os()));
}
