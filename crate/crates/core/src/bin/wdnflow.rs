fn main() {
    std::process::exit(wdnflow::cli::main());
}
