fn main() {
    std::process::exit(twoframes_cli::run(std::env::args_os()));
}
