fn main() {
    std::process::exit(caidgeo::cli::main());
}
