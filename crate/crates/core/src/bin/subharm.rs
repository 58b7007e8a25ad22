fn main() {
    std::process::exit(subharm::cli::main_with_args(std::env::args_os()));
}
