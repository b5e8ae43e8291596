fn main() {
    std::process::exit(k2reg::cli::main_with_args(std::env::args_os().skip(1)));
}
