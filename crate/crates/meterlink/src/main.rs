fn main() {
    std::process::exit(meterlink::cli::main());
}
