fn main() {
    std::process::exit(lsscatter::harness::cli::run(std::env::args_os()));
}
