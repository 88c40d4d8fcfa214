fn main() {
    std::process::exit(panelgarch_cli::main_entry());
}
