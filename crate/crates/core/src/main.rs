fn main() {
    std::process::exit(gkmeans::cli::run(std::env::args_os()));
}
