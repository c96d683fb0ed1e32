fn main() {
    std::process::exit(screencode::cli::run_command(std::env::args_os()));
}
