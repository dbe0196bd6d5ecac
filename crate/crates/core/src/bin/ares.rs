fn main() {
    std::process::exit(ares::cli::run());
}
