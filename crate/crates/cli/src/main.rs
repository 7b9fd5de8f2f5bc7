fn main() {
    std::process::exit(tarsim_cli::run_cli(std::env::args_os()));
}
