fn main() {
    std::process::exit(fpl_cli::cli::main(std::env::args_os()));
}
