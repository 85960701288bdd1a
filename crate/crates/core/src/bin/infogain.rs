fn main() {
    std::process::exit(infogain::cli::main_with_args(std::env::args_os()));
}
