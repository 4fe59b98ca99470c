fn main() {
    std::process::exit(bubbleflow::cli::main_with_args(std::env::args_os()));
}
