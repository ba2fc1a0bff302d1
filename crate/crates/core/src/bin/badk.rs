fn main() {
    std::process::exit(badk::cli::run(std::env::args_os()));
}
