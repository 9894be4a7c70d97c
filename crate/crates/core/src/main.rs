fn main() {
    std::process::exit(ccfp::cli::main_with_args(std::env::args_os()));
}
