fn main() {
    std::process::exit(stylemill::cli::main_with_args(std::env::args_os()));
}
