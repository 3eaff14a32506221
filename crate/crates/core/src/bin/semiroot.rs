fn main() {
    std::process::exit(semiroot::cli::main_with_args(std::env::args_os()));
}
