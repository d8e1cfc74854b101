fn main() {
    std::process::exit(formspace::cli::run(std::env::args_os()));
}
