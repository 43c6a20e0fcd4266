fn main() {
    std::process::exit(lenctl::cli::run(std::env::args_os()));
}
