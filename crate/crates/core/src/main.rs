fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(smoothprice::cli::run_cli(&argv));
}
