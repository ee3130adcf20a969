fn main() {
    std::process::exit(dense_cycle::cli::run(std::env::args_os()));
}
