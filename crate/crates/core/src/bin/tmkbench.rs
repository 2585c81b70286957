fn main() {
    std::process::exit(tmkbench::cli::run(std::env::args_os()));
}
