fn main() {
    std::process::exit(sepdyn::cli::main_with_args(std::env::args_os()));
}
