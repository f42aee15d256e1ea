fn main() {
    std::process::exit(qdistance::cli::run(std::env::args_os()));
}
