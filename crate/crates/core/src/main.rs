fn main() {
    std::process::exit(phase_averaging::cli::run_from(std::env::args_os()));
}
