fn main() {
    std::process::exit(rosenau_waves::cli::run(std::env::args_os()));
}
