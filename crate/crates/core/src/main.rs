fn main() {
    std::process::exit(germlab::cli::main_entry());
}
