fn main() {
    std::process::exit(qbilliard::cli::run_cli(std::env::args_os()));
}
