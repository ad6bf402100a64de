fn main() {
    std::process::exit(qpt_cli::run(std::env::args_os()));
}
