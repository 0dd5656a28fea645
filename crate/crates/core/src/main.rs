fn main() {
    std::process::exit(twodomain::cli::main_with_args(std::env::args_os()));
}
