fn main() {
    std::process::exit(pull_aoi::cli::run(std::env::args_os()));
}
