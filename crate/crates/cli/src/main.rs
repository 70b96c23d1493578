fn main() {
    std::process::exit(pvarsde_cli::run_with_args(std::env::args_os()));
}
