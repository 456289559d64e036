fn main() {
    std::process::exit(ssmlab::cli::run(std::env::args_os()));
}
