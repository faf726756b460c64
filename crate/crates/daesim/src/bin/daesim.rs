fn main() {
    std::process::exit(daesim::cli::run_cli(std::env::args_os()));
}
