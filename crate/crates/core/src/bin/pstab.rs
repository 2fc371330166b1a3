fn main() {
    let code = pstabilizer::cli::run_from_args(std::env::args_os(), &mut std::io::stdout());
    std::process::exit(code);
}
