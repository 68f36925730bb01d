fn main() {
    std::process::exit(marketlab_cli::run(std::env::args_os()));
}
