fn main() {
    std::process::exit(dirac_eq::cli::main_with_args(std::env::args_os()));
}
