fn main() {
    std::process::exit(blockspot::cli::run(std::env::args_os()));
}
