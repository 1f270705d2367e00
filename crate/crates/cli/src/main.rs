fn main() {
    std::process::exit(pmdkit::run(std::env::args()));
}
