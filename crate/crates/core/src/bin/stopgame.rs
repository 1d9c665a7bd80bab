fn main() {
    std::process::exit(stopgame::cli::run(std::env::args_os()));
}
