fn main() {
    std::process::exit(sparse_lsq::cli::main());
}
