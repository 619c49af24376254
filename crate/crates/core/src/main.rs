fn main() {
    let stdout = std::io::stdout();
    let code = quantum3::cli::run_args(std::env::args_os(), &mut stdout.lock());
    std::process::exit(code);
}
