fn main() {
    std::process::exit(chernlab_cli::run(std::env::args_os()));
}
