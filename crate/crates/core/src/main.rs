fn main() {
    std::process::exit(ordwb::cli::run());
}
