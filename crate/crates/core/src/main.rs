fn main() {
    std::process::exit(fracdiff::cli_io::main_with_args(std::env::args_os().skip(1)));
}
