fn main() {
    std::process::exit(sigevo::cli::run(std::env::args_os()));
}
