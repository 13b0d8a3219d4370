fn main() {
    std::process::exit(resonwell::cli::main());
}
