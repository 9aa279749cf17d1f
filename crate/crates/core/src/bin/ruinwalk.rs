fn main() {
    std::process::exit(ruinwalk::cli::run(std::env::args_os()));
}
