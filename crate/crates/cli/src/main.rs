fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(vortex_cli::run(&argv));
}
