fn main() {
    let args: Vec<String> = std::env::args().collect();
    std::process::exit(qcmix::cli::main_impl(&args));
}
