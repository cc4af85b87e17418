fn main() {
    std::process::exit(jmoment::cli::run(std::env::args_os()));
}
