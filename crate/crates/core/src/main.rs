fn main() {
    std::process::exit(revroles::cli::main_with_args(std::env::args_os()));
}
