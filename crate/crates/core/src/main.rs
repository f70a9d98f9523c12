fn main() {
    std::process::exit(sectorsched::cli::run(std::env::args_os()));
}
