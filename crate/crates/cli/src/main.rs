fn main() {
    std::process::exit(invspan_cli::run(std::env::args_os()));
}
