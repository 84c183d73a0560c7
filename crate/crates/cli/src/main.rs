fn main() {
    let out = invcurve::run(std::env::args_os());
    print!("{}", out.stdout);
    std::process::exit(out.code);
}
