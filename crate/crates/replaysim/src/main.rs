fn main() {
    std::process::exit(replaysim::cli::run());
}
