fn main() {
    let code = hopu::cli::main(std::env::args().collect());
    std::process::exit(code);
}
