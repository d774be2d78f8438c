fn main() {
    std::process::exit(padic_harmonic_cli::main_with_args(std::env::args_os()));
}
