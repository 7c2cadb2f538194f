fn main() {
    std::process::exit(levsim::run(std::env::args_os()));
}
