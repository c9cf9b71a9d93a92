fn main() {
    std::process::exit(madcert::cli::run(std::env::args_os()));
}
