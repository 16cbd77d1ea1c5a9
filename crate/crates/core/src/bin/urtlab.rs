fn main() {
    std::process::exit(urtlab::cli::main())
}
