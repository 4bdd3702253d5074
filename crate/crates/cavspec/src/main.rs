fn main() {
    std::process::exit(cavspec::cli::run());
}
