fn main() {
    let mut out = std::io::stdout().lock();
    std::process::exit(hyperview_cli::cli::run(std::env::args_os(), &mut out));
}
