fn main() {
    eprintln!("sgcalc: command-line interface not assembled yet");
    std::process::exit(2);
}
