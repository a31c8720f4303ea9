fn main() {
    std::process::exit(tilde_cli::run(std::env::args_os()));
}
