fn main() {
    std::process::exit(fqpe_cli::main_with_args(std::env::args().skip(1).collect()));
}
