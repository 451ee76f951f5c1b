fn main() {
    std::process::exit(david::cli::main_with_args(std::env::args_os()));
}
