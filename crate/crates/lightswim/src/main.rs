fn main() {
    std::process::exit(lightswim::cli::main());
}
