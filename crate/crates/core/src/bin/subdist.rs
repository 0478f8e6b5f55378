fn main() {
    std::process::exit(subdist::bench::cli_main(std::env::args_os()));
}
