fn main() {
    std::process::exit(kdsm::cli::main());
}
