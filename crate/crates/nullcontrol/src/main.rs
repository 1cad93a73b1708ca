fn main() {
    std::process::exit(nullcontrol::cli::run(std::env::args_os()));
}
