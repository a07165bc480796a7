fn main() {
    std::process::exit(majsearch::cli::main_with(std::env::args_os()));
}
