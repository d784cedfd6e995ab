fn main() {
    std::process::exit(lcr_rot::cli::run(std::env::args_os()));
}
