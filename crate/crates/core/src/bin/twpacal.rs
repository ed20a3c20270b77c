fn main() {
    std::process::exit(twpacal::cli::run(std::env::args_os()));
}
