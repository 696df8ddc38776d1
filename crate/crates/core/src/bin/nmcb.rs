fn main() {
    std::process::exit(nmc_bounds::cli::main_with_args(std::env::args_os()));
}
