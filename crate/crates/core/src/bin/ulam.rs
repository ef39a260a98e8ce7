fn main() {
    std::process::exit(ulam::cli::main(std::env::args_os()));
}
