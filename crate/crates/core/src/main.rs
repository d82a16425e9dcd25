fn main() {
    std::process::exit(sparselaw::cli::cli_main(std::env::args_os()));
}
