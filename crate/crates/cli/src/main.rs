fn main() {
    std::process::exit(periodlab_cli::run(std::env::args_os()));
}
