fn main() {
    std::process::exit(qhmc::cli::run());
}
