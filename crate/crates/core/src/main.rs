fn main() {
    std::process::exit(prodmap::cli::run(std::env::args_os()));
}
