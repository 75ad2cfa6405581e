fn main() {
    std::process::exit(kacjl::cli::cli_main(std::env::args_os()));
}
