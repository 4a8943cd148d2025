fn main() {
    std::process::exit(embedconst_cli::main_with_args(std::env::args_os()));
}
