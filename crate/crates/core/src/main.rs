fn main() {
    std::process::exit(specdesign::cli::main_with(std::env::args_os()));
}
