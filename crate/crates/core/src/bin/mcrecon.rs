fn main() {
    std::process::exit(mcrecon::cli::main());
}
