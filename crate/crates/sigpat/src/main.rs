fn main() {
    std::process::exit(sigpat::cli::run());
}
