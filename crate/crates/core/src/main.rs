fn main() {
    std::process::exit(abusenet::cli::run_command(std::env::args_os()));
}
