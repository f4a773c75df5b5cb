fn main() {
    std::process::exit(caoli_cli::run(std::env::args_os()));
}
