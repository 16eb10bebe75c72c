fn main() {
    std::process::exit(basicgap::report::cli::run(std::env::args_os()));
}
