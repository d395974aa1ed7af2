fn main() {
    std::process::exit(ellcount::cli::run(std::env::args_os()));
}
