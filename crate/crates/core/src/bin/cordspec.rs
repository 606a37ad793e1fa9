fn main() {
    std::process::exit(cordspec::cli::main_with_args(std::env::args_os()));
}
