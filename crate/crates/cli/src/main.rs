fn main() {
    std::process::exit(covertctl::run_from_env());
}
