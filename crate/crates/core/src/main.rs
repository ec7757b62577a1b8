fn main() {
    std::process::exit(secbeam::cli::cli_main(std::env::args_os()));
}
