fn main() {
    std::process::exit(rho_lite::cli::main());
}
