fn main() {
    let args: Vec<String> = std::env::args().collect();
    let (code, text) = qteich::cli::run(&args);
    print!("{text}");
    std::process::exit(code);
}
