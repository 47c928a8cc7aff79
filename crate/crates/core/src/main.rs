fn main() {
    std::process::exit(convtrack::cli::run_cli(std::env::args_os()));
}
