fn main() {
    std::process::exit(colcp::cli::main_with_args(std::env::args_os()));
}
