fn main() {
    std::process::exit(rebvoter_cli::run(std::env::args_os()));
}
