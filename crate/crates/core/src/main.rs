fn main() {
    std::process::exit(playclass::cli::main());
}
