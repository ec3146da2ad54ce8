fn main() {
    std::process::exit(doomsday::cli::run(std::env::args_os()));
}
