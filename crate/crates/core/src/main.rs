fn main() {
    std::process::exit(boostray::cli::main());
}
