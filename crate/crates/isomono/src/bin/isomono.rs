fn main() {
    std::process::exit(isomono::cli::run(std::env::args_os()));
}
