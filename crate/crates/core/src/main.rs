fn main() {
    std::process::exit(ocm::cli::dispatch(std::env::args_os()));
}
