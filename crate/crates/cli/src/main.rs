fn main() {
    std::process::exit(magnetodisk_cli::run(std::env::args_os()));
}
