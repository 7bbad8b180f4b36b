fn main() {
    std::process::exit(fsuq::cli::run(std::env::args_os()));
}
