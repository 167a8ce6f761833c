fn main() {
    std::process::exit(birkhoff::cli::main_with_args(std::env::args_os()));
}
