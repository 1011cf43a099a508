fn main() {
    std::process::exit(ksburgers::cli::main_with_args(std::env::args_os()));
}
