fn main() {
    std::process::exit(cips::cli::main_from_env());
}
