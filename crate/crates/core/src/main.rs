fn main() {
    std::process::exit(hsurf::cli::main());
}
