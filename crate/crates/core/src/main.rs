fn main() {
    env_logger::init();
    std::process::exit(memlens::cli::run(std::env::args()));
}
