fn main() {
    std::process::exit(quasi1d_experiments::cli::run(std::env::args_os()));
}
