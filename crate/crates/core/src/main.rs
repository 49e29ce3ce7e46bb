fn main() {
    std::process::exit(hnd_core::cli::run(std::env::args_os()));
}
