fn main() {
    std::process::exit(rectlattice::cli::run(std::env::args_os()));
}
