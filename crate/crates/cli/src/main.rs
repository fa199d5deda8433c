fn main() {
    std::process::exit(casimir_cli::main_with(std::env::args_os()));
}
