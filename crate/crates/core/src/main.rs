fn main() {
    std::process::exit(fhc_lab::cli::run(std::env::args_os()));
}
